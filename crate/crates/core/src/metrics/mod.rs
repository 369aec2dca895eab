//! Confusion-matrix metrics for the binary classifier and partition agreement
//! indices used by the clustering-based defense.

mod agreement;
mod classification;

pub use agreement::{
    entropy, fowlkes_mallows, homogeneity, mutual_information, rand_index, AgreementScores, Contingency,
};
pub use classification::{confusion, metric_row, ConfusionMatrix, MetricRow};
