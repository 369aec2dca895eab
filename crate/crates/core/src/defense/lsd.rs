use super::{check_pair, DefenseResult, Provenance};
use crate::classify::{cnn_fit, cnn_predict, TrainConfig};
use crate::data::Dataset;
use crate::ssl::{label_propagation, label_spreading, PropagationConfig};
use crate::{Label, Result};

/// Majority of the four voters; two against two goes to the CNN.
pub(crate) fn vote(ls: Label, lp: Label, cnn: Label, poisoned: Label) -> Label {
    match ls + lp + cnn + poisoned {
        0 | 1 => 0,
        2 => cnn,
        _ => 1,
    }
}

/// Label spreading, label propagation and a CNN are all trained on the
/// validation set and predict every training row; each row then takes the
/// majority of those three predictions and its poisoned label.
pub fn lsd(
    train_poisoned: &Dataset,
    validation: &Dataset,
    ssl_cfg: &PropagationConfig,
    cnn_cfg: &TrainConfig,
) -> Result<DefenseResult> {
    check_pair(train_poisoned, validation)?;
    let x_val = validation.to_matrix();
    let x_train = train_poisoned.to_matrix();
    let ls = label_spreading(&x_val, validation.labels(), &x_train, ssl_cfg)?;
    let lp = label_propagation(&x_val, validation.labels(), &x_train, ssl_cfg)?;
    let model = cnn_fit(validation, cnn_cfg)?;
    let (_, cnn) = cnn_predict(&model, &x_train)?;

    let converged = ls.converged && lp.converged;
    let poisoned = train_poisoned.labels();
    let mut corrected = Vec::with_capacity(poisoned.len());
    let mut provenance = Vec::with_capacity(poisoned.len());
    for i in 0..poisoned.len() {
        corrected.push(vote(ls.labels[i], lp.labels[i], cnn[i], poisoned[i]));
        provenance.push(Provenance::Vote {
            ls: ls.labels[i],
            lp: lp.labels[i],
            cnn: cnn[i],
            poisoned: poisoned[i],
            converged,
        });
    }
    let mut result = DefenseResult::new(poisoned, corrected, provenance)?;
    if !converged {
        result.warnings.push(format!(
            "propagation stopped at the iteration cap (spreading {} steps, propagation {} steps)",
            ls.iterations, lp.iterations
        ));
    }
    let unreachable = ls.unreachable.iter().filter(|&&u| u).count();
    if unreachable > 0 {
        result.warnings.push(format!(
            "{unreachable} training rows had no graph path to a validation row"
        ));
    }
    Ok(result)
}
