use std::collections::VecDeque;

use ndarray::Array2;

use crate::cluster::KnnIndex;
use crate::{Error, Result};

/// Symmetric 0/1 adjacency built from K nearest neighbours.
///
/// `kernel_k` counts the point itself, so every node links to its
/// `kernel_k - 1` nearest other nodes; an edge exists when either endpoint
/// lists the other. The diagonal is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityGraph {
    neighbors: Vec<Vec<usize>>,
    kernel_k: usize,
}

impl AffinityGraph {
    pub fn knn(points: &Array2<f64>, kernel_k: usize) -> Result<Self> {
        if kernel_k < 2 {
            return Err(Error::config("kernel_k counts the point itself and must be at least 2"));
        }
        let n = points.nrows();
        let index = KnnIndex::new(points.clone())?;
        let mut neighbors = vec![Vec::new(); n];
        if n >= 2 {
            for i in 0..n {
                for j in index.query_excluding(i, kernel_k - 1)? {
                    neighbors[i].push(j);
                    neighbors[j].push(i);
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { neighbors, kernel_k })
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn kernel_k(&self) -> usize {
        self.kernel_k
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.len();
        let mut w = Array2::zeros((n, n));
        for (i, list) in self.neighbors.iter().enumerate() {
            for &j in list {
                w[[i, j]] = 1.0;
            }
        }
        w
    }

    /// Nodes connected to at least one of `sources`.
    pub fn reachable_from(&self, sources: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for s in sources {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(i) = queue.pop_front() {
            for &j in &self.neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen
    }
}
