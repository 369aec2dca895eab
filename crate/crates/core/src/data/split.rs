use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::{rng_from_seed, Error, Result};

/// Train / validation / test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios(pub [f64; 3]);

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios([0.6, 0.2, 0.2])
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::config(format!("split ratios {:?} must be non-negative", self.0)));
        }
        let total: f64 = self.0.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!(
                "split ratios {:?} sum to {total}, not 1",
                self.0
            )));
        }
        Ok(())
    }

    /// Part sizes: train gets round(r0 n), validation round(r1 n), test the rest.
    pub fn sizes(&self, n: usize) -> [usize; 3] {
        let train = ((self.0[0] * n as f64).round() as usize).min(n);
        let validation = ((self.0[1] * n as f64).round() as usize).min(n - train);
        [train, validation, n - train - validation]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
    pub seed: u64,
}

/// Stratified, seeded three-way split.
///
/// Each class is shuffled independently and cut with cumulative rounding, so
/// every part's per-class count is within one sample of its proportional
/// share. Rows inside each part keep their source order.
pub fn split_dataset(ds: &Dataset, ratios: SplitRatios, seed: u64) -> Result<DatasetSplit> {
    ratios.validate()?;
    let n = ds.n();
    if n < 3 {
        return Err(Error::data(format!("cannot split {n} rows into three parts")));
    }
    let sizes = ratios.sizes(n);
    if let Some(p) = sizes.iter().position(|&s| s == 0) {
        let name = ["train", "validation", "test"][p];
        return Err(Error::config(format!(
            "ratios {:?} leave the {name} part empty for n={n}",
            ratios.0
        )));
    }
    let cumulative = [sizes[0], sizes[0] + sizes[1], n];

    let mut rng = rng_from_seed(seed);
    let mut parts: [Vec<usize>; 3] = Default::default();
    let mut class0_taken = 0usize;
    for label in [0u8, 1u8] {
        let mut rows: Vec<usize> = (0..n).filter(|&i| ds.labels()[i] == label).collect();
        rows.shuffle(&mut rng);
        let class_n = rows.len();
        let mut start = 0usize;
        for (p, &cum) in cumulative.iter().enumerate() {
            let end = if label == 0 {
                ((class_n * cum) as f64 / n as f64).round() as usize
            } else {
                // Class 1 fills whatever class 0 left in each part.
                let class0_end = ((class0_taken * cum) as f64 / n as f64).round() as usize;
                cum - class0_end
            };
            parts[p].extend_from_slice(&rows[start..end]);
            start = end;
        }
        if label == 0 {
            class0_taken = class_n;
        }
    }

    let mut built = parts.into_iter().map(|mut rows| {
        rows.sort_unstable();
        ds.subset(&rows)
    });
    Ok(DatasetSplit {
        train: built.next().expect("three parts")?,
        validation: built.next().expect("three parts")?,
        test: built.next().expect("three parts")?,
        seed,
    })
}
