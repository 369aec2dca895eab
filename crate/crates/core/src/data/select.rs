use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::{Error, Result};

/// Per-feature importance and the feature order it induces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    importance: Vec<f64>,
    order: Vec<usize>,
}

impl FeatureRanking {
    /// Sorts by descending importance; equal importances keep ascending index.
    pub fn from_importance(importance: Vec<f64>) -> Result<Self> {
        if importance.is_empty() {
            return Err(Error::data("ranking over zero features"));
        }
        if let Some(bad) = importance.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::data(format!("importance {bad} is not a non-negative real")));
        }
        let mut order: Vec<usize> = (0..importance.len()).collect();
        order.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]));
        Ok(Self { importance, order })
    }

    pub fn importance(&self) -> &[f64] {
        &self.importance
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.importance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.importance.is_empty()
    }

    /// Position of each feature in `order`.
    pub fn rank_of(&self) -> Vec<usize> {
        let mut rank = vec![0; self.order.len()];
        for (pos, &feature) in self.order.iter().enumerate() {
            rank[feature] = pos;
        }
        rank
    }
}

/// Keeps the `m` best-ranked columns, best first.
pub fn select_top_features(ds: &Dataset, ranking: &FeatureRanking, m: usize) -> Result<Dataset> {
    if ranking.len() != ds.k() {
        return Err(Error::Dimension {
            expected: ds.k(),
            actual: ranking.len(),
        });
    }
    if m == 0 || m > ds.k() {
        return Err(Error::config(format!("cannot select {m} of {} features", ds.k())));
    }
    ds.columns(&ranking.order()[..m])
}
