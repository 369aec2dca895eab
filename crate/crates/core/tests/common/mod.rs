//! Brute-force reference implementations written straight from the
//! definitions, plus proptest strategies shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use lfd_core::data::Dataset;
use ndarray::Array2;
use proptest::prelude::*;

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn rows(x: &Array2<f64>) -> Vec<Vec<f64>> {
    x.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// s(i) = (b - a) / max(a, b) with a the mean distance to the rest of i's
/// cluster and b the smallest mean distance to another cluster; 0 for a
/// singleton cluster.
pub fn silhouette(x: &Array2<f64>, labels: &[usize]) -> Vec<f64> {
    let pts = rows(x);
    let mut clusters: Vec<usize> = labels.to_vec();
    clusters.sort_unstable();
    clusters.dedup();
    (0..pts.len())
        .map(|i| {
            let own: Vec<usize> = (0..pts.len()).filter(|&j| j != i && labels[j] == labels[i]).collect();
            if own.is_empty() {
                return 0.0;
            }
            let a = own.iter().map(|&j| dist(&pts[i], &pts[j])).sum::<f64>() / own.len() as f64;
            let b = clusters
                .iter()
                .filter(|&&c| c != labels[i])
                .map(|&c| {
                    let members: Vec<usize> = (0..pts.len()).filter(|&j| labels[j] == c).collect();
                    members.iter().map(|&j| dist(&pts[i], &pts[j])).sum::<f64>() / members.len() as f64
                })
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m == 0.0 {
                0.0
            } else {
                (b - a) / m
            }
        })
        .collect()
}

/// Fraction of unordered pairs on which the two labelings agree.
pub fn rand_index(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut agree, mut total) = (0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            total += 1;
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    agree as f64 / total as f64
}

/// TP / sqrt((TP + FP)(TP + FN)) over pairs; 0 when any factor vanishes.
pub fn fowlkes_mallows(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                _ => {}
            }
        }
    }
    if tp == 0 || tp + fp == 0 || tp + fn_ == 0 {
        return 0.0;
    }
    tp as f64 / (((tp + fp) * (tp + fn_)) as f64).sqrt()
}

fn counts(v: &[usize]) -> BTreeMap<usize, f64> {
    let mut m = BTreeMap::new();
    for &x in v {
        *m.entry(x).or_insert(0.0) += 1.0;
    }
    m
}

pub fn entropy(v: &[usize]) -> f64 {
    let n = v.len() as f64;
    counts(v).values().map(|&c| -(c / n) * (c / n).log2()).sum()
}

/// Sum over joint cells of p(a,b) log2(p(a,b) / (p(a) p(b))).
pub fn mutual_information(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let (ca, cb) = (counts(a), counts(b));
    let mut joint = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_insert(0.0) += 1.0;
    }
    joint
        .iter()
        .map(|(&(x, y), &c)| {
            let pxy = c / n;
            pxy * (pxy / ((ca[&x] / n) * (cb[&y] / n))).log2()
        })
        .sum()
}

/// 1 - H(C|K) / H(C); 1 when H(C) = 0.
pub fn homogeneity(classes: &[usize], clusters: &[usize]) -> f64 {
    let h_c = entropy(classes);
    if h_c == 0.0 {
        return 1.0;
    }
    let n = classes.len() as f64;
    let mut h_ck = 0.0;
    for (&k, &nk) in &counts(clusters) {
        let members: Vec<usize> = classes
            .iter()
            .zip(clusters)
            .filter(|(_, &c)| c == k)
            .map(|(&y, _)| y)
            .collect();
        h_ck += nk / n * entropy(&members);
    }
    1.0 - h_ck / h_c
}

/// K nearest other rows by Euclidean distance, ties to the lower index.
pub fn nearest_others(x: &Array2<f64>, i: usize, k: usize) -> Vec<usize> {
    let pts = rows(x);
    let mut others: Vec<(f64, usize)> = (0..pts.len())
        .filter(|&j| j != i)
        .map(|j| (dist(&pts[i], &pts[j]), j))
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    others.into_iter().take(k).map(|(_, j)| j).collect()
}

pub fn matrix(n: usize, k: usize, bits: &[bool]) -> Array2<u8> {
    Array2::from_shape_fn((n, k), |(i, j)| u8::from(bits[i * k + j]))
}

/// Random binary dataset with `n` in `n_range` and `k` in `k_range`.
pub fn dataset(
    n_range: std::ops::RangeInclusive<usize>,
    k_range: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = Dataset> {
    (n_range, k_range).prop_flat_map(|(n, k)| {
        (
            proptest::collection::vec(any::<bool>(), n * k),
            proptest::collection::vec(0u8..2, n),
        )
            .prop_map(move |(bits, labels)| {
                Dataset::new(matrix(n, k, &bits), labels, Dataset::default_names(k)).unwrap()
            })
    })
}

pub fn gaussian_matrix(rng: &mut impl rand::Rng, n: usize, k: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, k), |_| {
        let u1: f64 = rng.random_range(1e-12..1.0);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    })
}
