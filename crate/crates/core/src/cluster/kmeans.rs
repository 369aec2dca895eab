use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::squared_distance;
use crate::{rng_from_seed, Error, Result, Rng};

/// Two centroids closer than this (squared) to a point are treated as tied.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub n_clusters: usize,
    pub max_iter: usize,
    /// Lloyd stops once no centroid moves more than this distance.
    pub tol: f64,
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            n_clusters: 2,
            max_iter: 300,
            tol: 1e-6,
            restarts: 10,
            seed: 0,
        }
    }
}

impl KMeansConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    pub centroids: Array2<f64>,
    pub assignment: Vec<usize>,
    pub inertia: f64,
    /// Inertia after every assignment step of the winning restart.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
    /// Fewer distinct points than clusters, or a cluster ended up empty.
    pub degenerate: bool,
}

impl KMeansModel {
    /// Nearest centroid; ties go to the lower index.
    pub fn predict(&self, x: ArrayView1<'_, f64>) -> usize {
        nearest(&self.centroids, x).0
    }

    pub fn n_clusters(&self) -> usize {
        self.centroids.nrows()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters()];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }
}

fn nearest(centroids: &Array2<f64>, x: ArrayView1<'_, f64>) -> (usize, f64) {
    let mut best = (0, squared_distance(centroids.row(0), x));
    for (c, centroid) in centroids.rows().into_iter().enumerate().skip(1) {
        let d = squared_distance(centroid, x);
        if d < best.1 - TIE_TOLERANCE {
            best = (c, d);
        }
    }
    best
}

/// Lloyd's algorithm from k-means++ seeding, best of `cfg.restarts` runs.
pub fn kmeans_fit(x: &Array2<f64>, cfg: &KMeansConfig) -> Result<KMeansModel> {
    let n = x.nrows();
    if cfg.n_clusters == 0 {
        return Err(Error::config("n_clusters must be at least 1"));
    }
    if n < cfg.n_clusters {
        return Err(Error::data(format!(
            "{n} samples cannot form {} clusters",
            cfg.n_clusters
        )));
    }
    if cfg.max_iter == 0 || cfg.restarts == 0 || cfg.tol.is_nan() || cfg.tol < 0.0 {
        return Err(Error::config("k-means needs max_iter >= 1, restarts >= 1, tol >= 0"));
    }

    let mut rng = rng_from_seed(cfg.seed);
    let mut best: Option<KMeansModel> = None;
    for _ in 0..cfg.restarts {
        let Some(init) = seed_centroids(x, cfg.n_clusters, &mut rng) else {
            return Ok(coincident_model(x, cfg.n_clusters));
        };
        let model = lloyd(x, init, cfg);
        if best.as_ref().is_none_or(|b| model.inertia < b.inertia) {
            best = Some(model);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// k-means++ seeding. `None` when fewer than `k` distinct points exist.
fn seed_centroids(x: &Array2<f64>, k: usize, rng: &mut Rng) -> Option<Array2<f64>> {
    let n = x.nrows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut min_d2: Vec<f64> = (0..n).map(|i| squared_distance(x.row(i), x.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = min_d2.iter().sum();
        if total <= 0.0 {
            return None;
        }
        let mut target = rng.random::<f64>() * total;
        let mut pick = n - 1;
        for (i, &d) in min_d2.iter().enumerate() {
            if d > 0.0 && target < d {
                pick = i;
                break;
            }
            target -= d;
        }
        // Floating-point leftovers can land on a zero-weight tail; walk back.
        while min_d2[pick] <= 0.0 {
            pick -= 1;
        }
        chosen.push(pick);
        for (i, d) in min_d2.iter_mut().enumerate() {
            *d = d.min(squared_distance(x.row(i), x.row(pick)));
        }
    }
    Some(x.select(ndarray::Axis(0), &chosen))
}

fn coincident_model(x: &Array2<f64>, k: usize) -> KMeansModel {
    let first = x.row(0).to_owned();
    let mut centroids = Array2::zeros((k, x.ncols()));
    for mut row in centroids.rows_mut() {
        row.assign(&first);
    }
    let inertia = x.rows().into_iter().map(|r| squared_distance(r, first.view())).sum();
    KMeansModel {
        centroids,
        assignment: vec![0; x.nrows()],
        inertia,
        inertia_trace: vec![inertia],
        iterations: 0,
        degenerate: true,
    }
}

fn assign(x: &Array2<f64>, centroids: &Array2<f64>, assignment: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (i, slot) in assignment.iter_mut().enumerate() {
        let (c, d) = nearest(centroids, x.row(i));
        *slot = c;
        inertia += d;
    }
    inertia
}

fn lloyd(x: &Array2<f64>, mut centroids: Array2<f64>, cfg: &KMeansConfig) -> KMeansModel {
    let k = centroids.nrows();
    let mut assignment = vec![0; x.nrows()];
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        trace.push(assign(x, &centroids, &mut assignment));
        iterations += 1;

        let mut sums = Array2::<f64>::zeros(centroids.dim());
        let mut counts = vec![0usize; k];
        for (i, &c) in assignment.iter().enumerate() {
            let mut row = sums.row_mut(c);
            row += &x.row(i);
            counts[c] += 1;
        }
        let mut shift = 0.0f64;
        for (c, &count) in counts.iter().enumerate() {
            // An empty cluster keeps its previous centroid.
            if count == 0 {
                continue;
            }
            let updated: Array1<f64> = sums.row(c).mapv(|v| v / count as f64);
            shift = shift.max(squared_distance(updated.view(), centroids.row(c)).sqrt());
            centroids.row_mut(c).assign(&updated);
        }
        if shift <= cfg.tol {
            break;
        }
    }
    let inertia = assign(x, &centroids, &mut assignment);
    trace.push(inertia);
    let mut counts = vec![0usize; k];
    for &c in &assignment {
        counts[c] += 1;
    }
    KMeansModel {
        centroids,
        assignment,
        inertia,
        inertia_trace: trace,
        iterations,
        degenerate: counts.contains(&0),
    }
}
