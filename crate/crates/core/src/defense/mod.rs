//! Label correction for a poisoned training set. LSD and CSD use a clean
//! validation set, KSSD uses only the training rows themselves, and the
//! generator baseline augments training with synthetic rows.

mod csd;
mod gan;
mod kssd;
mod lsd;
mod result;

pub use csd::{csd, CsdConfig};
pub use gan::{gan_defense, GanConfig};
pub use kssd::{kssd, KssdConfig};
pub use lsd::lsd;
pub use result::{write_defense_csv, DefenseResult, Provenance};

use crate::data::Dataset;
use crate::{Error, Result};

fn check_pair(train: &Dataset, validation: &Dataset) -> Result<()> {
    if train.k() != validation.k() {
        return Err(Error::Dimension {
            expected: train.k(),
            actual: validation.k(),
        });
    }
    if !validation.has_both_classes() {
        return Err(Error::data("validation set must contain both classes"));
    }
    Ok(())
}
