use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::check_targets;
use crate::data::Dataset;
use crate::{bce_with_logit, sigmoid, Error, Label, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub iterations: usize,
    pub learning_rate: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            learning_rate: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticModel {
    pub fn zeros(k: usize) -> Self {
        Self {
            weights: vec![0.0; k],
            bias: 0.0,
        }
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn logit(&self, x: ArrayView1<'_, f64>) -> f64 {
        self.bias + self.weights.iter().zip(x.iter()).map(|(w, v)| w * v).sum::<f64>()
    }

    pub fn predict_score(&self, x: ArrayView1<'_, f64>) -> f64 {
        sigmoid(self.logit(x))
    }

    /// Mean cross-entropy and its gradient; the bias derivative comes last.
    pub fn loss_and_gradient(&self, x: &Array2<f64>, y: &[Label]) -> Result<(f64, Vec<f64>)> {
        check_targets(x, y)?;
        self.check_width(x.ncols())?;
        let n = x.nrows() as f64;
        let mut grad = vec![0.0; self.k() + 1];
        let mut loss = 0.0;
        for (row, &target) in x.rows().into_iter().zip(y) {
            let z = self.logit(row);
            let t = f64::from(target);
            loss += bce_with_logit(z, t);
            let d = (sigmoid(z) - t) / n;
            for (g, v) in grad.iter_mut().zip(row.iter()) {
                *g += d * v;
            }
            grad[self.k()] += d;
        }
        Ok((loss / n, grad))
    }

    fn check_width(&self, k: usize) -> Result<()> {
        if k != self.k() {
            return Err(Error::Dimension {
                expected: self.k(),
                actual: k,
            });
        }
        Ok(())
    }
}

/// Full-batch gradient descent on mean cross-entropy from a zero start.
pub fn logistic_fit_matrix(x: &Array2<f64>, y: &[Label], cfg: &LogisticConfig) -> Result<LogisticModel> {
    if cfg.learning_rate.is_nan() || cfg.learning_rate <= 0.0 {
        return Err(Error::config("logistic learning_rate must be positive"));
    }
    check_targets(x, y)?;
    let mut model = LogisticModel::zeros(x.ncols());
    for _ in 0..cfg.iterations {
        let (_, grad) = model.loss_and_gradient(x, y)?;
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            *w -= cfg.learning_rate * g;
        }
        model.bias -= cfg.learning_rate * grad[model.k()];
    }
    Ok(model)
}

pub fn logistic_fit(train: &Dataset, cfg: &LogisticConfig) -> Result<LogisticModel> {
    logistic_fit_matrix(&train.to_matrix(), train.labels(), cfg)
}

pub fn logistic_predict(model: &LogisticModel, x: &Array2<f64>) -> Result<Vec<f64>> {
    model.check_width(x.ncols())?;
    Ok(x.rows().into_iter().map(|r| model.predict_score(r)).collect())
}
