use ndarray::{concatenate, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::AffinityGraph;
use crate::{Error, Label, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    /// Neighbours per node, counting the node itself.
    pub kernel_k: usize,
    /// Weight of the propagated term in label spreading.
    pub alpha: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            kernel_k: 7,
            alpha: 0.2,
            max_iter: 1000,
            tol: 1e-3,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::config("tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::config("max_iter must be at least 1"));
        }
        if self.kernel_k < 2 {
            return Err(Error::config("kernel_k must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationOutput {
    /// Predicted labels for the unlabeled rows.
    pub labels: Vec<Label>,
    /// Final label distribution for every node, labeled rows first.
    pub distribution: Array2<f64>,
    pub iterations: usize,
    /// Whether the last update moved no entry by `tol` or more.
    pub converged: bool,
    /// Unlabeled rows with no path to a labeled row; these receive the
    /// majority label of the labeled set.
    pub unreachable: Vec<bool>,
}

struct Problem {
    graph: AffinityGraph,
    n_labeled: usize,
    y0: Array2<f64>,
    majority: Label,
}

fn prepare(x_lab: &Array2<f64>, y_lab: &[Label], x_unlab: &Array2<f64>, cfg: &PropagationConfig) -> Result<Problem> {
    cfg.validate()?;
    if y_lab.len() != x_lab.nrows() {
        return Err(Error::Dimension {
            expected: x_lab.nrows(),
            actual: y_lab.len(),
        });
    }
    if x_lab.ncols() != x_unlab.ncols() {
        return Err(Error::Dimension {
            expected: x_lab.ncols(),
            actual: x_unlab.ncols(),
        });
    }
    let ones = y_lab.iter().filter(|&&y| y == 1).count();
    if y_lab.iter().any(|&y| y > 1) || ones == 0 || ones == y_lab.len() {
        return Err(Error::data("labeled set must contain both classes 0 and 1"));
    }
    let joint = concatenate(Axis(0), &[x_lab.view(), x_unlab.view()]).expect("column counts match");
    let graph = AffinityGraph::knn(&joint, cfg.kernel_k)?;
    let mut y0 = Array2::zeros((joint.nrows(), 2));
    for (i, &y) in y_lab.iter().enumerate() {
        y0[[i, usize::from(y)]] = 1.0;
    }
    Ok(Problem {
        graph,
        n_labeled: y_lab.len(),
        y0,
        majority: u8::from(ones * 2 > y_lab.len()),
    })
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn read_out(problem: &Problem, f: Array2<f64>, iterations: usize, converged: bool) -> PropagationOutput {
    let reach = problem.graph.reachable_from(0..problem.n_labeled);
    let n = f.nrows();
    let mut labels = Vec::with_capacity(n - problem.n_labeled);
    let mut unreachable = Vec::with_capacity(n - problem.n_labeled);
    for i in problem.n_labeled..n {
        if reach[i] {
            labels.push(u8::from(f[[i, 1]] > f[[i, 0]]));
            unreachable.push(false);
        } else {
            labels.push(problem.majority);
            unreachable.push(true);
        }
    }
    PropagationOutput {
        labels,
        distribution: f,
        iterations,
        converged,
        unreachable,
    }
}

/// Hard-clamped propagation: `F <- T F` with `T` the row-normalised
/// adjacency, resetting labeled rows to their one-hot labels after each step.
pub fn label_propagation(
    x_lab: &Array2<f64>,
    y_lab: &[Label],
    x_unlab: &Array2<f64>,
    cfg: &PropagationConfig,
) -> Result<PropagationOutput> {
    let problem = prepare(x_lab, y_lab, x_unlab, cfg)?;
    let g = &problem.graph;
    let mut f = problem.y0.clone();
    let mut next = f.clone();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        for i in 0..g.len() {
            if i < problem.n_labeled {
                continue;
            }
            let deg = g.degree(i) as f64;
            for c in 0..2 {
                next[[i, c]] = g.neighbors(i).iter().map(|&j| f[[j, c]]).sum::<f64>() / deg;
            }
        }
        iterations += 1;
        let change = max_abs_diff(&next, &f);
        std::mem::swap(&mut f, &mut next);
        if change < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(read_out(&problem, f, iterations, converged))
}

/// Soft-clamped spreading: `F <- alpha S F + (1 - alpha) Y0` with
/// `S = D^-1/2 W D^-1/2`.
pub fn label_spreading(
    x_lab: &Array2<f64>,
    y_lab: &[Label],
    x_unlab: &Array2<f64>,
    cfg: &PropagationConfig,
) -> Result<PropagationOutput> {
    let problem = prepare(x_lab, y_lab, x_unlab, cfg)?;
    let g = &problem.graph;
    let inv_sqrt_deg: Vec<f64> = (0..g.len()).map(|i| 1.0 / (g.degree(i) as f64).sqrt()).collect();
    let mut f = problem.y0.clone();
    let mut next = f.clone();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        for i in 0..g.len() {
            for c in 0..2 {
                let spread: f64 = g.neighbors(i).iter().map(|&j| inv_sqrt_deg[j] * f[[j, c]]).sum();
                next[[i, c]] = cfg.alpha * inv_sqrt_deg[i] * spread + (1.0 - cfg.alpha) * problem.y0[[i, c]];
            }
        }
        iterations += 1;
        let change = max_abs_diff(&next, &f);
        std::mem::swap(&mut f, &mut next);
        if change < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(read_out(&problem, f, iterations, converged))
}
