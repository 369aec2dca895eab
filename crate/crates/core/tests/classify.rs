mod common;

use lfd_core::classify::*;
use lfd_core::data::{generate_synthetic, Dataset, SyntheticSpec};
use lfd_core::rng_from_seed;
use ndarray::{array, Array2};
use proptest::prelude::*;

const H: f64 = 1e-4;
/// Denominator floor so that gradients that are zero up to rounding do not
/// blow the ratio up.
const FLOOR: f64 = 1e-6;

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(FLOOR)
}

fn cnn_max_rel_err(input_len: usize, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed ^ 0x5eed);
    let x = common::gaussian_matrix(&mut rng, 4, input_len);
    let y = [0, 1, 1, 0];
    let mut model = Cnn1dModel::new(input_len, seed).unwrap();
    model.set_dense_bias(0.1);
    let (_, grad) = model.loss_and_gradient(&x, &y).unwrap();
    let mut worst = 0.0f64;
    for (p, &g) in grad.iter().enumerate() {
        let orig = model.params()[p];
        model.params_mut()[p] = orig + H;
        let up = model.loss(&x, &y).unwrap();
        model.params_mut()[p] = orig - H;
        let down = model.loss(&x, &y).unwrap();
        model.params_mut()[p] = orig;
        worst = worst.max(rel_err(g, (up - down) / (2.0 * H)));
    }
    worst
}

fn logistic_max_rel_err(k: usize, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let x = common::gaussian_matrix(&mut rng, 4, k);
    let y = [1, 0, 0, 1];
    let mut params = common::gaussian_matrix(&mut rng, 1, k + 1).row(0).to_vec();
    let model = |p: &[f64]| LogisticModel {
        weights: p[..k].to_vec(),
        bias: p[k],
    };
    let loss = |p: &[f64]| model(p).loss_and_gradient(&x, &y).unwrap().0;
    let (_, grad) = model(&params).loss_and_gradient(&x, &y).unwrap();
    let mut worst = 0.0f64;
    for (p, &g) in grad.iter().enumerate() {
        let orig = params[p];
        params[p] = orig + H;
        let up = loss(&params);
        params[p] = orig - H;
        let down = loss(&params);
        params[p] = orig;
        worst = worst.max(rel_err(g, (up - down) / (2.0 * H)));
    }
    worst
}

#[test]
fn cnn_gradient_matches_finite_differences() {
    for (len, seed) in [(52, 1), (64, 2), (77, 3)] {
        let err = cnn_max_rel_err(len, seed);
        assert!(err <= 1e-4, "input length {len}: max relative error {err:e}");
    }
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    for (k, seed) in [(1, 4), (8, 5), (64, 6)] {
        let err = logistic_max_rel_err(k, seed);
        assert!(err <= 1e-6, "k={k}: max relative error {err:e}");
    }
}

fn separable(n_per_class: usize, seed: u64) -> Dataset {
    generate_synthetic(&SyntheticSpec::new(n_per_class, 64, 1.0, 0.0, 0.0, seed)).unwrap()
}

fn accuracy(model: &Cnn1dModel, ds: &Dataset) -> f64 {
    let (_, labels) = cnn_predict(model, &ds.to_matrix()).unwrap();
    labels.iter().zip(ds.labels()).filter(|(a, b)| a == b).count() as f64 / ds.n() as f64
}

#[test]
fn memorises_separable_set() {
    let train = separable(20, 1);
    let cfg = TrainConfig {
        epochs: 50,
        seed: 3,
        ..TrainConfig::default()
    };
    let (model, history) = cnn_train(&train.to_matrix(), train.labels(), &cfg).unwrap();
    assert_eq!(accuracy(&model, &train), 1.0);
    for e in 0..history.len() - 5 {
        assert!(history[e + 5] <= history[e] + 1e-6, "epoch {e}: {history:?}");
    }
    assert!(accuracy(&model, &separable(50, 99)) >= 0.95);
}

#[test]
fn zero_epochs_is_initialisation() {
    let train = separable(10, 2);
    let cfg = TrainConfig {
        epochs: 0,
        seed: 11,
        ..TrainConfig::default()
    };
    let model = cnn_fit(&train, &cfg).unwrap();
    assert_eq!(model, Cnn1dModel::new(64, 11).unwrap());
}

#[test]
fn training_is_deterministic() {
    let train = separable(12, 4);
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 5,
        seed: 21,
        ..TrainConfig::default()
    };
    assert_eq!(cnn_fit(&train, &cfg).unwrap(), cnn_fit(&train, &cfg).unwrap());
}

#[test]
fn rejects_short_inputs_and_small_sets() {
    let short = generate_synthetic(&SyntheticSpec::new(10, 40, 1.0, 0.0, 0.0, 0)).unwrap();
    assert!(matches!(
        cnn_fit(&short, &TrainConfig::default()),
        Err(lfd_core::Error::InputTooShort { minimum: 52, .. })
    ));
    let tiny = separable(2, 0);
    assert!(cnn_fit(&tiny, &TrainConfig::default()).is_err());
}

#[test]
fn score_rises_with_dense_bias() {
    let mut model = Cnn1dModel::new(60, 5).unwrap();
    let x = Array2::from_shape_fn((1, 60), |(_, j)| (j % 3) as f64);
    let mut last = 0.0;
    for b in [-4.0, -1.0, 0.0, 0.5, 3.0] {
        model.set_dense_bias(b);
        let s = model.predict_scores(&x).unwrap()[0];
        assert!(s > last && s < 1.0);
        last = s;
    }
}

#[test]
fn model_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    let model = cnn_fit(
        &separable(8, 1),
        &TrainConfig {
            epochs: 2,
            batch_size: 4,
            ..TrainConfig::default()
        },
    )
    .unwrap();
    model.save(&path).unwrap();
    assert_eq!(Cnn1dModel::load(&path).unwrap(), model);
}

#[test]
fn logistic_single_feature() {
    let x = array![[1.0], [0.0], [1.0], [0.0]];
    let m = logistic_fit_matrix(&x, &[1, 0, 1, 0], &LogisticConfig::default()).unwrap();
    assert!(m.weights[0] > 0.0);
}

proptest! {
    #[test]
    fn stack_arithmetic(len in 52usize..2000) {
        let l = stack_lengths(len).unwrap();
        let conv = |n: usize| (n - 2) / 2 + 1;
        let pool = |n: usize| (n - 4) / 2 + 1;
        prop_assert_eq!(l.conv1, conv(len));
        prop_assert_eq!(l.pool1, pool(l.conv1));
        prop_assert_eq!(l.conv2, conv(l.pool1));
        prop_assert_eq!(l.pool2, pool(l.conv2));
        prop_assert_eq!(l.conv3, conv(l.pool2));
        let model = Cnn1dModel::new(len, 0).unwrap();
        prop_assert_eq!(model.conv_shapes(), [(16, 1, 2), (32, 16, 2), (64, 32, 2)]);
        prop_assert_eq!(model.dense_weights().len(), 64 * l.conv3);
    }

    #[test]
    fn scores_are_probabilities(seed in any::<u64>(), len in 52usize..90) {
        let mut rng = rng_from_seed(seed);
        let x = common::gaussian_matrix(&mut rng, 3, len).mapv(|v| v * 10.0);
        for s in Cnn1dModel::new(len, seed).unwrap().predict_scores(&x).unwrap() {
            prop_assert!(s > 0.0 && s < 1.0);
        }
    }

    #[test]
    fn forest_importance_sums_to_one(ds in common::dataset(2..=40, 1..=10), seed in any::<u64>()) {
        let y: Vec<f64> = ds.labels().iter().map(|&v| f64::from(v)).collect();
        let forest = ForestRegressor::fit(ds.features(), &y, &ForestConfig { n_trees: 10, max_depth: 4, seed }).unwrap();
        let total: f64 = forest.importance().iter().sum();
        if forest.any_split() {
            prop_assert!((total - 1.0).abs() < 1e-9);
        } else {
            prop_assert_eq!(total, 0.0);
        }
        prop_assert!(forest.importance().iter().all(|&v| v >= 0.0));
    }
}
