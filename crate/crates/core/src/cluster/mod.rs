//! K-means, silhouette values and exact nearest-neighbour search, all under
//! Euclidean distance.

mod kmeans;
mod knn;
mod silhouette;

pub use kmeans::{kmeans_fit, KMeansConfig, KMeansModel};
pub use knn::KnnIndex;
pub use silhouette::{silhouette_values, SilhouetteValues};

use ndarray::ArrayView1;

pub(crate) fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    squared_distance(a, b).sqrt()
}
