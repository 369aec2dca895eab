use ndarray::Array2;
use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureRanking};
use crate::{rng_from_seed, Error, Result, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(f64),
    /// Rows with the feature at 0 go to `zero`, rows at 1 to `one`.
    Split {
        feature: usize,
        zero: usize,
        one: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, row: &[u8]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split { feature, zero, one } => at = if row[feature] == 0 { zero } else { one },
            }
        }
    }
}

/// Bagged regression trees over binary features, each split testing one
/// feature for 0 versus 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestRegressor {
    trees: Vec<Tree>,
    importance: Vec<f64>,
    any_split: bool,
}

fn sse(sum: f64, sum_sq: f64, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        sum_sq - sum * sum / count as f64
    }
}

struct Builder<'a> {
    x: &'a Array2<u8>,
    y: &'a [f64],
    max_depth: usize,
    max_features: usize,
    rng: &'a mut Rng,
    nodes: Vec<Node>,
    importance: &'a mut [f64],
}

impl Builder<'_> {
    fn grow(&mut self, rows: &[usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let sum: f64 = rows.iter().map(|&r| self.y[r]).sum();
        self.nodes.push(Node::Leaf(sum / rows.len() as f64));
        if depth >= self.max_depth || rows.len() < 2 {
            return id;
        }
        let sum_sq: f64 = rows.iter().map(|&r| self.y[r] * self.y[r]).sum();
        let parent = sse(sum, sum_sq, rows.len());
        if parent <= 1e-12 {
            return id;
        }

        let k = self.x.ncols();
        let mut best: Option<(usize, f64)> = None;
        for feature in sample(self.rng, k, self.max_features).into_iter() {
            let (mut s1, mut q1, mut n1) = (0.0, 0.0, 0usize);
            for &r in rows {
                if self.x[[r, feature]] == 1 {
                    s1 += self.y[r];
                    q1 += self.y[r] * self.y[r];
                    n1 += 1;
                }
            }
            if n1 == 0 || n1 == rows.len() {
                continue;
            }
            let gain = parent - sse(s1, q1, n1) - sse(sum - s1, sum_sq - q1, rows.len() - n1);
            if gain > 1e-12 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((feature, gain));
            }
        }
        let Some((feature, gain)) = best else {
            return id;
        };
        self.importance[feature] += gain;
        let (ones, zeros): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| self.x[[r, feature]] == 1);
        let zero = self.grow(&zeros, depth + 1);
        let one = self.grow(&ones, depth + 1);
        self.nodes[id] = Node::Split { feature, zero, one };
        id
    }
}

impl ForestRegressor {
    /// Fits `cfg.n_trees` trees on bootstrap samples, drawing
    /// `max(1, floor(sqrt(k)))` candidate features at every split.
    pub fn fit(x: &Array2<u8>, y: &[f64], cfg: &ForestConfig) -> Result<Self> {
        let (n, k) = x.dim();
        if n < 2 {
            return Err(Error::data("forest needs at least two samples"));
        }
        if y.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: y.len(),
            });
        }
        if cfg.n_trees == 0 {
            return Err(Error::config("n_trees must be at least 1"));
        }
        let max_features = ((k as f64).sqrt().floor() as usize).clamp(1, k);
        let mut rng = rng_from_seed(cfg.seed);
        let mut importance = vec![0.0; k];
        let mut trees = Vec::with_capacity(cfg.n_trees);
        for _ in 0..cfg.n_trees {
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut builder = Builder {
                x,
                y,
                max_depth: cfg.max_depth,
                max_features,
                rng: &mut rng,
                nodes: Vec::new(),
                importance: &mut importance,
            };
            builder.grow(&rows, 0);
            trees.push(Tree { nodes: builder.nodes });
        }
        let total: f64 = importance.iter().sum();
        let any_split = total > 0.0;
        if any_split {
            importance.iter_mut().for_each(|v| *v /= total);
        }
        Ok(Self {
            trees,
            importance,
            any_split,
        })
    }

    /// Normalised variance-reduction importance per feature; all zeros when
    /// no tree ever split.
    pub fn importance(&self) -> &[f64] {
        &self.importance
    }

    pub fn any_split(&self) -> bool {
        self.any_split
    }

    pub fn predict(&self, x: &Array2<u8>) -> Vec<f64> {
        x.rows()
            .into_iter()
            .map(|r| {
                let row = r.to_vec();
                self.trees.iter().map(|t| t.predict(&row)).sum::<f64>() / self.trees.len() as f64
            })
            .collect()
    }
}

pub fn rf_rank_features(train: &Dataset, cfg: &ForestConfig) -> Result<FeatureRanking> {
    let y: Vec<f64> = train.labels().iter().map(|&v| f64::from(v)).collect();
    let forest = ForestRegressor::fit(train.features(), &y, cfg)?;
    FeatureRanking::from_importance(forest.importance().to_vec())
}
