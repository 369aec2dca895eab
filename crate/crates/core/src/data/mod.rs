//! Binary feature datasets: representation, file formats, splitting,
//! synthetic generation and ranked feature selection.

mod io;
mod select;
mod split;
mod synthetic;

pub use io::{load_dataset, read_dataset, save_dataset, write_dataset, DataFormat};
pub use select::{select_top_features, FeatureRanking};
pub use split::{split_dataset, DatasetSplit, SplitRatios};
pub use synthetic::{generate_synthetic, SyntheticSpec};

use ndarray::{Array2, Axis};

use crate::{Error, Label, Result};

/// An n x k matrix of binary features with binary labels.
///
/// Every row carries a stable id. Ids are assigned `0..n` when a dataset is
/// loaded or generated and survive splitting and column selection, so flip
/// masks and relabelings can be traced back to the source rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<u8>,
    labels: Vec<Label>,
    feature_names: Vec<String>,
    row_ids: Vec<usize>,
}

impl Dataset {
    pub fn new(features: Array2<u8>, labels: Vec<Label>, feature_names: Vec<String>) -> Result<Self> {
        let n = features.nrows();
        Self::with_row_ids(features, labels, feature_names, (0..n).collect())
    }

    pub fn with_row_ids(
        features: Array2<u8>,
        labels: Vec<Label>,
        feature_names: Vec<String>,
        row_ids: Vec<usize>,
    ) -> Result<Self> {
        let (n, k) = features.dim();
        if n == 0 {
            return Err(Error::Empty("dataset".into()));
        }
        if k == 0 {
            return Err(Error::data("dataset has no feature columns"));
        }
        if labels.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: labels.len(),
            });
        }
        if feature_names.len() != k {
            return Err(Error::Dimension {
                expected: k,
                actual: feature_names.len(),
            });
        }
        if row_ids.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: row_ids.len(),
            });
        }
        if let Some(((i, j), v)) = features.indexed_iter().find(|(_, &v)| v > 1) {
            return Err(Error::data(format!(
                "feature value {v} at row {i}, column {j} is not binary"
            )));
        }
        if let Some((i, y)) = labels.iter().enumerate().find(|(_, &y)| y > 1) {
            return Err(Error::data(format!("label {y} at row {i} is not binary")));
        }
        Ok(Self {
            features,
            labels,
            feature_names,
            row_ids,
        })
    }

    /// Generic feature names `f0..f{k-1}`.
    pub fn default_names(k: usize) -> Vec<String> {
        (0..k).map(|j| format!("f{j}")).collect()
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn k(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<u8> {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    /// Features as reals, for distance and gradient computations.
    pub fn to_matrix(&self) -> Array2<f64> {
        self.features.mapv(f64::from)
    }

    pub fn count_label(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&y| y == label).count()
    }

    pub fn has_both_classes(&self) -> bool {
        self.count_label(0) > 0 && self.count_label(1) > 0
    }

    /// Same rows and features with a replacement label vector.
    pub fn with_labels(&self, labels: Vec<Label>) -> Result<Self> {
        Self::with_row_ids(
            self.features.clone(),
            labels,
            self.feature_names.clone(),
            self.row_ids.clone(),
        )
    }

    /// The rows at the given positions, in the given order, keeping their ids.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n()) {
            return Err(Error::Dimension {
                expected: self.n(),
                actual: bad,
            });
        }
        Self::with_row_ids(
            self.features.select(Axis(0), rows),
            rows.iter().map(|&r| self.labels[r]).collect(),
            self.feature_names.clone(),
            rows.iter().map(|&r| self.row_ids[r]).collect(),
        )
    }

    /// The given columns, in the given order.
    pub fn columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.k()) {
            return Err(Error::Dimension {
                expected: self.k(),
                actual: bad,
            });
        }
        Self::with_row_ids(
            self.features.select(Axis(1), cols),
            self.labels.clone(),
            cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
            self.row_ids.clone(),
        )
    }
}
