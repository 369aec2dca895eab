use serde::{Deserialize, Serialize};

use super::{check_pair, DefenseResult, Provenance};
use crate::classify::{cnn_fit, cnn_predict, TrainConfig};
use crate::cluster::{kmeans_fit, KMeansConfig};
use crate::data::Dataset;
use crate::metrics::Contingency;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsdConfig {
    /// Largest agreement shift a row may cause and still be accepted.
    pub threshold: f64,
    #[serde(default)]
    pub kmeans: KMeansConfig,
}

impl Default for CsdConfig {
    fn default() -> Self {
        Self {
            threshold: 0.1,
            kmeans: KMeansConfig::default(),
        }
    }
}

/// A CNN fit on the validation set labels every training row. Each row is
/// then tested against the agreement between a two-cluster k-means partition
/// of the validation set and the validation labels: the row is added with
/// its nearest cluster and its predicted label, and
/// `S = |dRI + dMI + dHM + dFMI|` is recorded. Rows with `S <= threshold`
/// form the accepted pool. Every row's corrected label is the CNN prediction.
pub fn csd(
    train_poisoned: &Dataset,
    validation: &Dataset,
    cnn_cfg: &TrainConfig,
    cfg: &CsdConfig,
) -> Result<DefenseResult> {
    check_pair(train_poisoned, validation)?;
    if cfg.threshold.is_nan() || cfg.threshold < 0.0 {
        return Err(Error::config("CSD threshold must be non-negative"));
    }
    if validation.n() < 2 {
        return Err(Error::data("CSD needs at least two validation rows"));
    }
    let model = cnn_fit(validation, cnn_cfg)?;
    let (_, y_hat) = cnn_predict(&model, &train_poisoned.to_matrix())?;

    let km_cfg = KMeansConfig {
        n_clusters: 2,
        ..cfg.kmeans.clone()
    };
    let x_val = validation.to_matrix();
    let km = kmeans_fit(&x_val, &km_cfg)?;
    if km.degenerate || km.cluster_sizes().contains(&0) {
        return Err(Error::Degenerate("validation features do not form two clusters".into()));
    }
    let classes: Vec<usize> = validation.labels().iter().map(|&y| usize::from(y)).collect();
    let base_table = Contingency::from_labelings(&classes, &km.assignment)?;
    let base = base_table.scores()?;

    let x_train = train_poisoned.to_matrix();
    let mut provenance = Vec::with_capacity(train_poisoned.n());
    let mut accepted_pool = Vec::new();
    for (i, row) in x_train.rows().into_iter().enumerate() {
        let mut table = base_table.clone();
        table.add(usize::from(y_hat[i]), km.predict(row));
        let s = (table.scores()?.sum() - base.sum()).abs();
        let accepted = s <= cfg.threshold;
        if accepted {
            accepted_pool.push(train_poisoned.row_ids()[i]);
        }
        provenance.push(Provenance::Csd { s, accepted });
    }
    let mut result = DefenseResult::new(train_poisoned.labels(), y_hat, provenance)?;
    result.accepted_pool = accepted_pool;
    Ok(result)
}
