//! Trainable models: the 1-D convolutional target classifier, logistic
//! regression, and a random-forest regressor used to rank features.

mod adam;
mod cnn;
mod forest;
mod logistic;

pub use cnn::{cnn_fit, cnn_predict, cnn_train, min_input_len, stack_lengths, Cnn1dModel, StackLengths, TrainConfig};
pub use forest::{rf_rank_features, ForestConfig, ForestRegressor};
pub use logistic::{logistic_fit, logistic_fit_matrix, logistic_predict, LogisticConfig, LogisticModel};

use ndarray::Array2;

use crate::{Error, Label, Result};

fn check_targets(x: &Array2<f64>, y: &[Label]) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::Empty("training set".into()));
    }
    if y.len() != x.nrows() {
        return Err(Error::Dimension {
            expected: x.nrows(),
            actual: y.len(),
        });
    }
    if let Some(bad) = y.iter().find(|&&v| v > 1) {
        return Err(Error::data(format!("label {bad} is not 0 or 1")));
    }
    Ok(())
}
