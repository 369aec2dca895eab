//! Partition agreement: Rand index, mutual information (bits), homogeneity and
//! Fowlkes-Mallows, all computed from one contingency table.

use std::collections::BTreeMap;

use crate::{Error, Result};

fn pairs(count: u64) -> f64 {
    let c = count as f64;
    c * (c - 1.0) / 2.0
}

/// Joint counts of two labelings over the same items.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Contingency {
    n: u64,
    left: BTreeMap<usize, u64>,
    right: BTreeMap<usize, u64>,
    joint: BTreeMap<(usize, usize), u64>,
}

/// The four agreement indices for one contingency table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementScores {
    pub rand_index: f64,
    pub mutual_information: f64,
    pub homogeneity: f64,
    pub fowlkes_mallows: f64,
}

impl AgreementScores {
    pub fn sum(&self) -> f64 {
        self.rand_index + self.mutual_information + self.homogeneity + self.fowlkes_mallows
    }
}

impl Contingency {
    pub fn from_labelings(left: &[usize], right: &[usize]) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::Dimension {
                expected: left.len(),
                actual: right.len(),
            });
        }
        let mut table = Self::default();
        for (&a, &b) in left.iter().zip(right) {
            table.add(a, b);
        }
        Ok(table)
    }

    pub fn add(&mut self, a: usize, b: usize) {
        self.n += 1;
        *self.left.entry(a).or_default() += 1;
        *self.right.entry(b).or_default() += 1;
        *self.joint.entry((a, b)).or_default() += 1;
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Pairs together in both, together in `left`, together in `right`.
    fn pair_counts(&self) -> (f64, f64, f64) {
        (
            self.joint.values().map(|&c| pairs(c)).sum(),
            self.left.values().map(|&c| pairs(c)).sum(),
            self.right.values().map(|&c| pairs(c)).sum(),
        )
    }

    pub fn rand_index(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::data("Rand index needs at least two items"));
        }
        let (both, left, right) = self.pair_counts();
        let total = pairs(self.n);
        // agreeing = together in both + apart in both
        Ok((total + 2.0 * both - left - right) / total)
    }

    pub fn fowlkes_mallows(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::data("Fowlkes-Mallows needs at least two items"));
        }
        let (both, left, right) = self.pair_counts();
        if both == 0.0 || left == 0.0 || right == 0.0 {
            return Ok(0.0);
        }
        Ok(both / (left * right).sqrt())
    }

    pub fn mutual_information(&self) -> f64 {
        let n = self.n as f64;
        self.joint
            .iter()
            .map(|(&(a, b), &c)| {
                let c = c as f64;
                (c / n) * (n * c / (self.left[&a] as f64 * self.right[&b] as f64)).log2()
            })
            .sum::<f64>()
            .max(0.0)
    }

    /// Homogeneity of `right` clusters with respect to `left` classes.
    pub fn homogeneity(&self) -> f64 {
        let n = self.n as f64;
        let class_entropy = entropy_of_counts(self.left.values().copied(), n);
        if class_entropy == 0.0 {
            return 1.0;
        }
        let conditional: f64 = -self
            .joint
            .iter()
            .map(|(&(_, b), &c)| {
                let c = c as f64;
                (c / n) * (c / self.right[&b] as f64).log2()
            })
            .sum::<f64>();
        (1.0 - conditional / class_entropy).clamp(0.0, 1.0)
    }

    /// All four indices with `left` read as the reference labeling.
    pub fn scores(&self) -> Result<AgreementScores> {
        Ok(AgreementScores {
            rand_index: self.rand_index()?,
            mutual_information: self.mutual_information(),
            homogeneity: self.homogeneity(),
            fowlkes_mallows: self.fowlkes_mallows()?,
        })
    }
}

fn entropy_of_counts(counts: impl Iterator<Item = u64>, n: f64) -> f64 {
    -counts
        .map(|c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>()
}

/// Shannon entropy of a labeling, in bits.
pub fn entropy(labels: &[usize]) -> f64 {
    let mut counts = BTreeMap::<usize, u64>::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    entropy_of_counts(counts.into_values(), labels.len() as f64)
}

pub fn rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    Contingency::from_labelings(a, b)?.rand_index()
}

/// Mutual information in bits.
pub fn mutual_information(a: &[usize], b: &[usize]) -> Result<f64> {
    Ok(Contingency::from_labelings(a, b)?.mutual_information())
}

/// `1 - H(true | pred) / H(true)`, defined as 1 when `H(true) = 0`.
pub fn homogeneity(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    Ok(Contingency::from_labelings(y_true, y_pred)?.homogeneity())
}

pub fn fowlkes_mallows(a: &[usize], b: &[usize]) -> Result<f64> {
    Contingency::from_labelings(a, b)?.fowlkes_mallows()
}
