//! Label-flipping poisoning and semi-supervised label correction for binary
//! feature vectors.
//!
//! The crate is organised bottom-up:
//!
//! - [`data`]: binary datasets, file formats, stratified splits, synthetic
//!   generation and feature selection.
//! - [`cluster`]: k-means, silhouette values and an exact KNN index.
//! - [`ssl`]: label propagation and label spreading over a KNN graph.
//! - [`classify`]: the 1-D convolutional target classifier, logistic
//!   regression and a random-forest regressor used for feature ranking.
//! - [`metrics`]: confusion-matrix metrics and partition agreement indices.
//! - [`attack`]: the silhouette-driven label-flipping attack.
//! - [`defense`]: LSD, CSD, KSSD and the generator-style baseline.

pub mod attack;
pub mod classify;
pub mod cluster;
pub mod data;
pub mod defense;
mod error;
pub mod metrics;
pub mod ssl;

pub use error::{Error, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere randomness is needed. ChaCha keeps streams
/// stable across platforms and crate versions.
pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Binary class label: 0 = benign, 1 = malware.
pub type Label = u8;

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of a logit against a {0,1} target, stable for large |z|.
pub(crate) fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}
