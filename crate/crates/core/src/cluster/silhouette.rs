use std::collections::BTreeMap;

use ndarray::Array2;

use super::distance;
use crate::{Error, Result};

/// Per-sample silhouette values, each in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct SilhouetteValues(Vec<f64>);

impl SilhouetteValues {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

/// Silhouette of every sample under Euclidean distance.
///
/// `a` is the mean distance to the other members of the sample's cluster and
/// `b` the smallest mean distance to another cluster; the value is
/// `(b - a) / max(a, b)`. Members of singleton clusters, and samples with
/// `a = b = 0`, get 0.
pub fn silhouette_values(x: &Array2<f64>, labels: &[usize]) -> Result<SilhouetteValues> {
    let n = x.nrows();
    if labels.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: labels.len(),
        });
    }
    let ids: BTreeMap<usize, usize> = labels
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(dense, label)| (label, dense))
        .collect();
    if ids.len() < 2 {
        return Err(Error::Degenerate("silhouette needs at least two clusters".into()));
    }
    let cluster: Vec<usize> = labels.iter().map(|l| ids[l]).collect();
    let n_clusters = ids.len();
    let mut sizes = vec![0usize; n_clusters];
    for &c in &cluster {
        sizes[c] += 1;
    }

    // sums[i * n_clusters + c]: total distance from sample i to cluster c.
    let mut sums = vec![0.0f64; n * n_clusters];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = distance(x.row(i), x.row(j));
            sums[i * n_clusters + cluster[j]] += d;
            sums[j * n_clusters + cluster[i]] += d;
        }
    }

    let values = (0..n)
        .map(|i| {
            let own = cluster[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let row = &sums[i * n_clusters..(i + 1) * n_clusters];
            let a = row[own] / (sizes[own] - 1) as f64;
            let b = (0..n_clusters)
                .filter(|&c| c != own)
                .map(|c| row[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let scale = a.max(b);
            if scale == 0.0 {
                0.0
            } else {
                (b - a) / scale
            }
        })
        .collect();
    Ok(SilhouetteValues(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn line() -> Array2<f64> {
        array![[0.0], [0.2], [10.0], [10.2]]
    }

    #[test]
    fn well_separated_pairs() {
        let sv = silhouette_values(&line(), &[0, 0, 1, 1]).unwrap();
        assert!((sv.as_slice()[0] - (10.1 - 0.2) / 10.1).abs() < 1e-12);
        assert!((sv.as_slice()[0] - 0.9802).abs() < 1e-4);
    }

    #[test]
    fn misassigned_point_goes_negative() {
        let sv = silhouette_values(&line(), &[0, 1, 1, 1]).unwrap();
        assert!((sv.as_slice()[1] - (0.2 - 9.9) / 9.9).abs() < 1e-12);
        assert!((sv.as_slice()[1] + 0.9798).abs() < 1e-4);
        // sample 0 is alone in its cluster
        assert_eq!(sv.as_slice()[0], 0.0);
    }

    #[test]
    fn coincident_points_are_zero() {
        let x = array![[1.0, 2.0], [1.0, 2.0], [1.0, 2.0], [1.0, 2.0]];
        let sv = silhouette_values(&x, &[0, 0, 1, 1]).unwrap();
        assert!(sv.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_cluster_is_an_error() {
        assert!(silhouette_values(&line(), &[3, 3, 3, 3]).is_err());
        assert!(silhouette_values(&line(), &[0, 1]).is_err());
    }

    #[test]
    fn arbitrary_label_values() {
        let a = silhouette_values(&line(), &[7, 7, 2, 2]).unwrap();
        let b = silhouette_values(&line(), &[0, 0, 1, 1]).unwrap();
        assert_eq!(a, b);
    }
}
