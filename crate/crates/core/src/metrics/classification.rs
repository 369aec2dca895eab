use serde::{Deserialize, Serialize};

use crate::{Error, Label, Result};

/// Binary confusion counts with class 1 (malware) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Evaluation metrics for one model; `None` marks a zero denominator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    /// `(TP/(TP+FP) + TN/(TN+FP)) / 2`, a confusion-matrix quantity rather
    /// than an integral under a ROC curve.
    pub auc: Option<f64>,
}

pub fn confusion(y_true: &[Label], y_pred: &[Label]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Dimension {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (0, 0) => cm.tn += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            _ => return Err(Error::data(format!("labels ({t}, {p}) are not binary"))),
        }
    }
    Ok(cm)
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metric_row(cm: &ConfusionMatrix) -> MetricRow {
    let ConfusionMatrix { tp, tn, fp, fn_ } = *cm;
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    // Harmonic mean of precision and recall; 2TP/(2TP+FP+FN) is the same
    // quantity and stays finite when either of them is 0.
    let f1 = match (precision, recall) {
        (Some(_), Some(_)) => ratio(2 * tp, 2 * tp + fp + fn_),
        _ => None,
    };
    let auc = match (ratio(tp, tp + fp), ratio(tn, tn + fp)) {
        (Some(a), Some(b)) => Some(0.5 * (a + b)),
        _ => None,
    };
    MetricRow {
        accuracy: ratio(tp + tn, tp + tn + fp + fn_),
        precision,
        recall,
        f1,
        fpr: ratio(fp, fp + tn),
        fnr: ratio(fn_, fn_ + tp),
        auc,
    }
}
