mod common;

use lfd_core::ssl::{label_propagation, label_spreading, AffinityGraph, PropagationConfig};
use nalgebra::DMatrix;
use ndarray::{concatenate, Array2, Axis};
use proptest::prelude::*;

/// Labeled points (both classes present), unlabeled points, kernel_k.
fn problem() -> impl Strategy<Value = (Array2<f64>, Vec<u8>, Array2<f64>, usize)> {
    (2usize..=20, 1usize..=30, 1usize..=4, 2usize..=8).prop_flat_map(|(n_lab, n_unlab, k, kernel_k)| {
        (
            proptest::collection::vec(-3.0f64..3.0, n_lab * k),
            proptest::collection::vec(0u8..2, n_lab).prop_filter("both classes", |y| y.contains(&0) && y.contains(&1)),
            proptest::collection::vec(-3.0f64..3.0, n_unlab * k),
            Just(kernel_k),
        )
            .prop_map(move |(xl, y, xu, kk)| {
                (
                    Array2::from_shape_vec((n_lab, k), xl).unwrap(),
                    y,
                    Array2::from_shape_vec((n_unlab, k), xu).unwrap(),
                    kk,
                )
            })
    })
}

/// 0/1 adjacency: i and j linked when either is among the other's
/// `kernel_k - 1` nearest other points.
fn oracle_adjacency(x: &Array2<f64>, kernel_k: usize) -> DMatrix<f64> {
    let n = x.nrows();
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in common::nearest_others(x, i, kernel_k - 1) {
            w[(i, j)] = 1.0;
            w[(j, i)] = 1.0;
        }
    }
    w
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spreading_matches_closed_form((xl, y, xu, kernel_k) in problem(), alpha in 0.05f64..0.95) {
        let cfg = PropagationConfig { kernel_k, alpha, tol: 1e-13, max_iter: 100_000 };
        let out = label_spreading(&xl, &y, &xu, &cfg).unwrap();
        prop_assert!(out.converged);

        let joint = concatenate(Axis(0), &[xl.view(), xu.view()]).unwrap();
        let n = joint.nrows();
        let w = oracle_adjacency(&joint, kernel_k);
        let d: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
        let s = DMatrix::from_fn(n, n, |i, j| w[(i, j)] / (d[i] * d[j]).sqrt());
        let mut y0 = DMatrix::zeros(n, 2);
        for (i, &label) in y.iter().enumerate() {
            y0[(i, usize::from(label))] = 1.0;
        }
        let a = DMatrix::identity(n, n) - s * alpha;
        let exact = a.lu().solve(&(y0 * (1.0 - alpha))).unwrap();
        for i in 0..n {
            for c in 0..2 {
                prop_assert!((out.distribution[[i, c]] - exact[(i, c)]).abs() <= 1e-6,
                    "entry ({}, {}): {} vs {}", i, c, out.distribution[[i, c]], exact[(i, c)]);
            }
        }
    }

    #[test]
    fn graph_is_symmetric_knn((xl, _y, xu, kernel_k) in problem()) {
        let joint = concatenate(Axis(0), &[xl.view(), xu.view()]).unwrap();
        let g = AffinityGraph::knn(&joint, kernel_k).unwrap().to_dense();
        let w = oracle_adjacency(&joint, kernel_k);
        for i in 0..joint.nrows() {
            prop_assert_eq!(g[[i, i]], 0.0);
            prop_assert!(g.row(i).sum() >= 1.0);
            for j in 0..joint.nrows() {
                prop_assert_eq!(g[[i, j]], g[[j, i]]);
                prop_assert_eq!(g[[i, j]], w[(i, j)]);
            }
        }
    }

    #[test]
    fn propagation_clamps_and_averages((xl, y, xu, kernel_k) in problem()) {
        let cfg = PropagationConfig { kernel_k, tol: 1e-12, max_iter: 200_000, ..PropagationConfig::default() };
        let out = label_propagation(&xl, &y, &xu, &cfg).unwrap();
        let f = &out.distribution;
        for (i, &label) in y.iter().enumerate() {
            prop_assert_eq!(f[[i, usize::from(label)]], 1.0);
            prop_assert_eq!(f[[i, 1 - usize::from(label)]], 0.0);
        }
        let joint = concatenate(Axis(0), &[xl.view(), xu.view()]).unwrap();
        let w = oracle_adjacency(&joint, kernel_k);
        for i in y.len()..joint.nrows() {
            let deg = w.row(i).sum();
            for c in 0..2 {
                let avg: f64 = (0..joint.nrows()).map(|j| w[(i, j)] * f[[j, c]]).sum::<f64>() / deg;
                prop_assert!((f[[i, c]] - avg).abs() <= 1e-9);
            }
            let u = i - y.len();
            if out.unreachable[u] {
                prop_assert!(f[[i, 0]] == 0.0 && f[[i, 1]] == 0.0);
            } else {
                prop_assert!((f[[i, 0]] + f[[i, 1]] - 1.0).abs() <= 1e-6);
            }
        }
    }
}

#[test]
fn chain_example() {
    let cfg = PropagationConfig {
        kernel_k: 2,
        ..PropagationConfig::default()
    };
    let x_lab = ndarray::array![[0.0], [10.0]];
    let x_unlab = ndarray::array![[3.0], [6.0]];
    assert_eq!(
        label_propagation(&x_lab, &[0, 1], &x_unlab, &cfg).unwrap().labels,
        vec![0, 1]
    );
    assert_eq!(
        label_spreading(&x_lab, &[0, 1], &x_unlab, &cfg).unwrap().labels,
        vec![0, 1]
    );
}
