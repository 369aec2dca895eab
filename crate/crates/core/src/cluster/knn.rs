use ndarray::{Array2, ArrayView1};

use super::squared_distance;
use crate::{Error, Result};

/// Exact Euclidean nearest-neighbour search over a fixed point set.
///
/// Results are ordered by non-decreasing distance with ties broken by
/// ascending point index.
#[derive(Debug, Clone)]
pub struct KnnIndex {
    points: Array2<f64>,
}

impl KnnIndex {
    pub fn new(points: Array2<f64>) -> Result<Self> {
        if points.nrows() == 0 {
            return Err(Error::Empty("KNN index".into()));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    /// The `min(k, n)` nearest stored points to `q`.
    pub fn query(&self, q: ArrayView1<'_, f64>, k: usize) -> Result<Vec<usize>> {
        self.ranked(q, k, None)
    }

    /// The `min(k, n - 1)` nearest stored points to stored point `i`,
    /// excluding `i` itself. Exact duplicates of `i` are still returned.
    pub fn query_excluding(&self, i: usize, k: usize) -> Result<Vec<usize>> {
        if i >= self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                actual: i,
            });
        }
        self.ranked(self.points.row(i), k, Some(i))
    }

    fn ranked(&self, q: ArrayView1<'_, f64>, k: usize, skip: Option<usize>) -> Result<Vec<usize>> {
        if k == 0 {
            return Err(Error::config("neighbour count must be at least 1"));
        }
        if q.len() != self.points.ncols() {
            return Err(Error::Dimension {
                expected: self.points.ncols(),
                actual: q.len(),
            });
        }
        let mut scored: Vec<(f64, usize)> = self
            .points
            .rows()
            .into_iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(i, p)| (squared_distance(p, q), i))
            .collect();
        let take = k.min(scored.len());
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if take < scored.len() {
            scored.select_nth_unstable_by(take, by_distance);
            scored.truncate(take);
        }
        scored.sort_by(by_distance);
        Ok(scored.into_iter().map(|(_, i)| i).collect())
    }
}
