use serde::{Deserialize, Serialize};

use super::{DefenseResult, Provenance};
use crate::cluster::KnnIndex;
use crate::data::Dataset;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KssdConfig {
    /// Neighbours consulted per row, the row itself excluded.
    pub k: usize,
    /// Minimum majority fraction for a relabel.
    pub t: f64,
}

impl Default for KssdConfig {
    fn default() -> Self {
        Self { k: 10, t: 0.5 }
    }
}

impl KssdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("KSSD needs k >= 1"));
        }
        if !(0.5..=1.0).contains(&self.t) {
            return Err(Error::config(format!("KSSD threshold {} outside [0.5, 1]", self.t)));
        }
        Ok(())
    }
}

/// Each row takes the majority label of its `k` nearest other rows when that
/// majority covers at least a fraction `t` of them. Neighbour labels are
/// always the poisoned input labels, so rows never influence each other
/// through earlier corrections. An exact split keeps the row's label.
pub fn kssd(train_poisoned: &Dataset, cfg: &KssdConfig) -> Result<DefenseResult> {
    cfg.validate()?;
    let n = train_poisoned.n();
    if n <= cfg.k {
        return Err(Error::data(format!("KSSD needs more than k={} rows, got {n}", cfg.k)));
    }
    let labels = train_poisoned.labels();
    let index = KnnIndex::new(train_poisoned.to_matrix())?;
    let mut corrected = labels.to_vec();
    let mut provenance = vec![Provenance::Unchanged; n];
    for i in 0..n {
        let neighbors = index.query_excluding(i, cfg.k)?;
        let ones = neighbors.iter().filter(|&&j| labels[j] == 1).count();
        let zeros = neighbors.len() - ones;
        if ones == zeros {
            continue;
        }
        let majority = u8::from(ones > zeros);
        let fraction = ones.max(zeros) as f64 / neighbors.len() as f64;
        if fraction >= cfg.t {
            corrected[i] = majority;
            provenance[i] = Provenance::Neighbor { majority, fraction };
        }
    }
    DefenseResult::new(labels, corrected, provenance)
}
