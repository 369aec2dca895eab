use ndarray::Array2;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::{rng_from_seed, Error, Result};

fn symmetric_prototypes() -> [f64; 2] {
    [0.5, 0.5]
}

/// Two-prototype Bernoulli generator for desk-scale binary benchmarks.
///
/// Class `c` owns a contiguous block of "prototype" features covering
/// `floor(prototype_fractions[c] * k)` columns. The two blocks share
/// `round(overlap * min(|P0|, |P1|))` columns. A row of class `c` sets each
/// prototype feature with probability `p_in` and every other feature with
/// probability `p_out`.
///
/// With the default symmetric fractions both classes have the same spread.
/// Unequal fractions with `p_in(1 - p_in) != p_out(1 - p_out)` make one class
/// more diffuse than the other, which is the regime where silhouette-based
/// flipping has something to flip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_per_class: usize,
    pub k: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub overlap: f64,
    #[serde(default = "symmetric_prototypes")]
    pub prototype_fractions: [f64; 2],
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(n_per_class: usize, k: usize, p_in: f64, p_out: f64, overlap: f64, seed: u64) -> Self {
        Self {
            n_per_class,
            k,
            p_in,
            p_out,
            overlap,
            prototype_fractions: symmetric_prototypes(),
            seed,
        }
    }

    pub fn with_prototype_fractions(mut self, fractions: [f64; 2]) -> Self {
        self.prototype_fractions = fractions;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_per_class == 0 {
            return Err(Error::config("n_per_class must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.p_out) || !(0.0..=1.0).contains(&self.p_in) || self.p_out > self.p_in {
            return Err(Error::config(format!(
                "need 0 <= p_out <= p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            )));
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return Err(Error::config(format!("overlap {} outside [0, 1]", self.overlap)));
        }
        if self.prototype_fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::config(format!(
                "prototype fractions {:?} outside [0, 1]",
                self.prototype_fractions
            )));
        }
        Ok(())
    }

    /// Column ranges `[start, end)` of the two class prototypes.
    pub fn prototype_ranges(&self) -> Result<[(usize, usize); 2]> {
        self.validate()?;
        let size = |f: f64| (f * self.k as f64).floor() as usize;
        let (p0, p1) = (size(self.prototype_fractions[0]), size(self.prototype_fractions[1]));
        let shared = (self.overlap * p0.min(p1) as f64).round() as usize;
        if p0 == 0 || p1 == 0 || p0 + p1 - shared > self.k {
            return Err(Error::config(format!(
                "k={} is too small for prototypes of {p0} and {p1} features sharing {shared}",
                self.k
            )));
        }
        Ok([(0, p0), (p0 - shared, p0 - shared + p1)])
    }
}

/// Class 0 rows come first, then class 1 rows.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    let ranges = spec.prototype_ranges()?;
    let n = 2 * spec.n_per_class;
    let mut rng = rng_from_seed(spec.seed);
    let mut features = Array2::<u8>::zeros((n, spec.k));
    let mut labels = Vec::with_capacity(n);
    for (class, &(start, end)) in ranges.iter().enumerate() {
        for r in 0..spec.n_per_class {
            let row = class * spec.n_per_class + r;
            for j in 0..spec.k {
                let p = if (start..end).contains(&j) {
                    spec.p_in
                } else {
                    spec.p_out
                };
                features[[row, j]] = u8::from(rng.random::<f64>() < p);
            }
            labels.push(class as u8);
        }
    }
    Dataset::new(features, labels, Dataset::default_names(spec.k))
}
