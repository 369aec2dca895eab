use std::path::Path;

use ndarray::{Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::check_targets;
use crate::data::Dataset;
use crate::{bce_with_logit, rng_from_seed, sigmoid, Error, Label, Result, Rng};

pub const FILTERS: [usize; 3] = [16, 32, 64];
pub const KERNEL: usize = 2;
pub const STRIDE: usize = 2;
pub const POOL: usize = 4;
pub const POOL_STRIDE: usize = 2;

const FORMAT: &str = "lfd-cnn1d";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 40,
            batch_size: 16,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config(format!(
                "learning_rate {} must be positive",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::config("Adam betas must lie in [0, 1)"));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::config("epsilon must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        Ok(())
    }
}

/// Sigmoid kept strictly inside (0, 1) where f64 would round to an endpoint.
fn probability(z: f64) -> f64 {
    sigmoid(z).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Output length of every stage for a given input length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackLengths {
    pub conv1: usize,
    pub pool1: usize,
    pub conv2: usize,
    pub pool2: usize,
    pub conv3: usize,
}

impl StackLengths {
    pub fn flattened(&self) -> usize {
        FILTERS[2] * self.conv3
    }
}

fn conv_len(len: usize) -> Option<usize> {
    (len >= KERNEL).then(|| (len - KERNEL) / STRIDE + 1)
}

fn pool_len(len: usize) -> Option<usize> {
    (len >= POOL).then(|| (len - POOL) / POOL_STRIDE + 1)
}

/// `None` when the input is too short to reach the dense layer.
pub fn stack_lengths(input_len: usize) -> Option<StackLengths> {
    let conv1 = conv_len(input_len)?;
    let pool1 = pool_len(conv1)?;
    let conv2 = conv_len(pool1)?;
    let pool2 = pool_len(conv2)?;
    let conv3 = conv_len(pool2)?;
    Some(StackLengths {
        conv1,
        pool1,
        conv2,
        pool2,
        conv3,
    })
}

/// Shortest input the convolution stack accepts.
pub fn min_input_len() -> usize {
    (1..)
        .find(|&l| stack_lengths(l).is_some())
        .expect("the stack accepts long inputs")
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ConvSlot {
    in_ch: usize,
    out_ch: usize,
    w: usize,
    b: usize,
}

impl ConvSlot {
    fn weight(&self, o: usize, i: usize, t: usize) -> usize {
        self.w + (o * self.in_ch + i) * KERNEL + t
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Layout {
    lengths: StackLengths,
    conv: [ConvSlot; 3],
    dense_w: usize,
    dense_b: usize,
    total: usize,
}

impl Layout {
    fn new(input_len: usize) -> Result<Self> {
        let lengths = stack_lengths(input_len).ok_or(Error::InputTooShort {
            actual: input_len,
            minimum: min_input_len(),
        })?;
        let mut offset = 0;
        let mut in_ch = 1;
        let conv = FILTERS.map(|out_ch| {
            let slot = ConvSlot {
                in_ch,
                out_ch,
                w: offset,
                b: offset + out_ch * in_ch * KERNEL,
            };
            offset = slot.b + out_ch;
            in_ch = out_ch;
            slot
        });
        let dense_w = offset;
        let dense_b = dense_w + lengths.flattened();
        Ok(Self {
            lengths,
            conv,
            dense_w,
            dense_b,
            total: dense_b + 1,
        })
    }
}

/// Conv1D(16) - MaxPool - Conv1D(32) - MaxPool - Conv1D(64) - Dense(1) with
/// ReLU after each convolution and a sigmoid output. Every weight and bias
/// lives in one flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Cnn1dModel {
    input_len: usize,
    params: Vec<f64>,
    layout: Layout,
}

#[derive(Serialize, Deserialize)]
struct SavedModel {
    format: String,
    version: u32,
    input_len: usize,
    params: Vec<f64>,
}

/// Activations kept from a forward pass, channel-major.
struct Trace {
    p0: Vec<f64>,
    a1: Vec<f64>,
    p1: Vec<f64>,
    p1_arg: Vec<usize>,
    a2: Vec<f64>,
    p2: Vec<f64>,
    p2_arg: Vec<usize>,
    a3: Vec<f64>,
    logit: f64,
}

fn conv_relu(params: &[f64], slot: &ConvSlot, input: &[f64], len_in: usize, len_out: usize) -> Vec<f64> {
    let mut out = vec![0.0; slot.out_ch * len_out];
    for o in 0..slot.out_ch {
        for p in 0..len_out {
            let mut z = params[slot.b + o];
            for i in 0..slot.in_ch {
                let base = i * len_in + p * STRIDE;
                for t in 0..KERNEL {
                    z += params[slot.weight(o, i, t)] * input[base + t];
                }
            }
            out[o * len_out + p] = z.max(0.0);
        }
    }
    out
}

fn max_pool(input: &[f64], channels: usize, len_in: usize, len_out: usize) -> (Vec<f64>, Vec<usize>) {
    let mut out = vec![0.0; channels * len_out];
    let mut arg = vec![0; channels * len_out];
    for c in 0..channels {
        for p in 0..len_out {
            let start = c * len_in + p * POOL_STRIDE;
            let mut best = start;
            for idx in start + 1..start + POOL {
                if input[idx] > input[best] {
                    best = idx;
                }
            }
            out[c * len_out + p] = input[best];
            arg[c * len_out + p] = best;
        }
    }
    (out, arg)
}

/// Accumulates parameter gradients of one conv layer given the gradient at
/// its post-ReLU output, and returns the gradient at its input when asked.
#[allow(clippy::too_many_arguments)]
fn conv_backward(
    params: &[f64],
    slot: &ConvSlot,
    input: &[f64],
    len_in: usize,
    output: &[f64],
    d_output: &[f64],
    len_out: usize,
    grad: &mut [f64],
    want_input_grad: bool,
) -> Vec<f64> {
    let mut d_input = if want_input_grad {
        vec![0.0; slot.in_ch * len_in]
    } else {
        Vec::new()
    };
    for o in 0..slot.out_ch {
        for p in 0..len_out {
            let idx = o * len_out + p;
            if output[idx] <= 0.0 {
                continue;
            }
            let dz = d_output[idx];
            grad[slot.b + o] += dz;
            for i in 0..slot.in_ch {
                let base = i * len_in + p * STRIDE;
                for t in 0..KERNEL {
                    let w = slot.weight(o, i, t);
                    grad[w] += dz * input[base + t];
                    if want_input_grad {
                        d_input[base + t] += dz * params[w];
                    }
                }
            }
        }
    }
    d_input
}

fn unpool(d_pooled: &[f64], arg: &[usize], len_in_total: usize) -> Vec<f64> {
    let mut d = vec![0.0; len_in_total];
    for (&g, &a) in d_pooled.iter().zip(arg) {
        d[a] += g;
    }
    d
}

impl Cnn1dModel {
    /// Freshly initialised model: He-uniform convolution weights, dense
    /// weights uniform in `±1/sqrt(fan_in)`, zero biases.
    pub fn new(input_len: usize, seed: u64) -> Result<Self> {
        Self::init(input_len, &mut rng_from_seed(seed))
    }

    fn init(input_len: usize, rng: &mut Rng) -> Result<Self> {
        let layout = Layout::new(input_len)?;
        let mut params = vec![0.0; layout.total];
        for slot in &layout.conv {
            let limit = (6.0 / (slot.in_ch * KERNEL) as f64).sqrt();
            for w in &mut params[slot.w..slot.b] {
                *w = rng.random_range(-limit..limit);
            }
        }
        let limit = 1.0 / (layout.lengths.flattened() as f64).sqrt();
        for w in &mut params[layout.dense_w..layout.dense_b] {
            *w = rng.random_range(-limit..limit);
        }
        Ok(Self {
            input_len,
            params,
            layout,
        })
    }

    /// Rebuilds a model from a flat parameter vector.
    pub fn from_params(input_len: usize, params: Vec<f64>) -> Result<Self> {
        let layout = Layout::new(input_len)?;
        if params.len() != layout.total {
            return Err(Error::Dimension {
                expected: layout.total,
                actual: params.len(),
            });
        }
        Ok(Self {
            input_len,
            params,
            layout,
        })
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn lengths(&self) -> StackLengths {
        self.layout.lengths
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.layout.total
    }

    /// Weight and bias block sizes of the three convolutions, `(out, in, kernel)`.
    pub fn conv_shapes(&self) -> [(usize, usize, usize); 3] {
        self.layout.conv.map(|s| (s.out_ch, s.in_ch, KERNEL))
    }

    pub fn dense_weights(&self) -> &[f64] {
        &self.params[self.layout.dense_w..self.layout.dense_b]
    }

    pub fn dense_weights_mut(&mut self) -> &mut [f64] {
        &mut self.params[self.layout.dense_w..self.layout.dense_b]
    }

    pub fn dense_bias(&self) -> f64 {
        self.params[self.layout.dense_b]
    }

    pub fn set_dense_bias(&mut self, b: f64) {
        self.params[self.layout.dense_b] = b;
    }

    fn check_input(&self, len: usize) -> Result<()> {
        if len != self.input_len {
            return Err(Error::Dimension {
                expected: self.input_len,
                actual: len,
            });
        }
        Ok(())
    }

    fn forward(&self, x: &[f64]) -> Trace {
        let l = self.layout.lengths;
        let [c1, c2, c3] = &self.layout.conv;
        let a1 = conv_relu(&self.params, c1, x, self.input_len, l.conv1);
        let (p1, p1_arg) = max_pool(&a1, c1.out_ch, l.conv1, l.pool1);
        let a2 = conv_relu(&self.params, c2, &p1, l.pool1, l.conv2);
        let (p2, p2_arg) = max_pool(&a2, c2.out_ch, l.conv2, l.pool2);
        let a3 = conv_relu(&self.params, c3, &p2, l.pool2, l.conv3);
        let logit =
            self.params[self.layout.dense_b] + self.dense_weights().iter().zip(&a3).map(|(w, a)| w * a).sum::<f64>();
        Trace {
            p0: x.to_vec(),
            a1,
            p1,
            p1_arg,
            a2,
            p2,
            p2_arg,
            a3,
            logit,
        }
    }

    /// Adds `scale * d loss / d params` for one sample and returns its loss.
    fn accumulate(&self, x: &[f64], y: f64, scale: f64, grad: &mut [f64]) -> f64 {
        let l = self.layout.lengths;
        let [c1, c2, c3] = &self.layout.conv;
        let tr = self.forward(x);
        let d_logit = scale * (sigmoid(tr.logit) - y);

        grad[self.layout.dense_b] += d_logit;
        let dw = self.layout.dense_w;
        let mut d_a3 = vec![0.0; tr.a3.len()];
        for (j, a) in tr.a3.iter().enumerate() {
            grad[dw + j] += d_logit * a;
            d_a3[j] = d_logit * self.params[dw + j];
        }
        let d_p2 = conv_backward(&self.params, c3, &tr.p2, l.pool2, &tr.a3, &d_a3, l.conv3, grad, true);
        let d_a2 = unpool(&d_p2, &tr.p2_arg, tr.a2.len());
        let d_p1 = conv_backward(&self.params, c2, &tr.p1, l.pool1, &tr.a2, &d_a2, l.conv2, grad, true);
        let d_a1 = unpool(&d_p1, &tr.p1_arg, tr.a1.len());
        conv_backward(
            &self.params,
            c1,
            &tr.p0,
            self.input_len,
            &tr.a1,
            &d_a1,
            l.conv1,
            grad,
            false,
        );

        bce_with_logit(tr.logit, y)
    }

    pub fn logit(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        self.check_input(x.len())?;
        Ok(self.forward(&x.to_vec()).logit)
    }

    pub fn predict_scores(&self, x: &Array2<f64>) -> Result<Vec<f64>> {
        self.check_input(x.ncols())?;
        Ok(x.rows()
            .into_iter()
            .map(|r| probability(self.forward(&r.to_vec()).logit))
            .collect())
    }

    /// Mean binary cross-entropy and its gradient over all rows of `x`.
    pub fn loss_and_gradient(&self, x: &Array2<f64>, y: &[Label]) -> Result<(f64, Vec<f64>)> {
        self.check_input(x.ncols())?;
        check_targets(x, y)?;
        let scale = 1.0 / x.nrows() as f64;
        let mut grad = vec![0.0; self.layout.total];
        let mut loss = 0.0;
        for (row, &target) in x.rows().into_iter().zip(y) {
            loss += self.accumulate(&row.to_vec(), f64::from(target), scale, &mut grad);
        }
        Ok((loss * scale, grad))
    }

    pub fn loss(&self, x: &Array2<f64>, y: &[Label]) -> Result<f64> {
        self.check_input(x.ncols())?;
        check_targets(x, y)?;
        let total: f64 = x
            .rows()
            .into_iter()
            .zip(y)
            .map(|(r, &t)| bce_with_logit(self.forward(&r.to_vec()).logit, f64::from(t)))
            .sum();
        Ok(total / x.nrows() as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SavedModel {
            format: FORMAT.into(),
            version: FORMAT_VERSION,
            input_len: self.input_len,
            params: self.params.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let saved: SavedModel = serde_json::from_str(text)?;
        if saved.format != FORMAT || saved.version != FORMAT_VERSION {
            return Err(Error::data(format!(
                "unsupported model format {} v{}",
                saved.format, saved.version
            )));
        }
        Self::from_params(saved.input_len, saved.params)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// Trains on a feature matrix and returns the model together with the mean
/// training loss measured after every epoch.
pub fn cnn_train(x: &Array2<f64>, y: &[Label], cfg: &TrainConfig) -> Result<(Cnn1dModel, Vec<f64>)> {
    cfg.validate()?;
    check_targets(x, y)?;
    if x.nrows() < cfg.batch_size {
        return Err(Error::config(format!(
            "{} samples are fewer than batch_size {}",
            x.nrows(),
            cfg.batch_size
        )));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let mut model = Cnn1dModel::init(x.ncols(), &mut rng)?;
    let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let targets: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let mut adam = Adam::new(model.n_params(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut grad = vec![0.0; model.n_params()];
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.fill(0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                model.accumulate(&rows[i], targets[i], scale, &mut grad);
            }
            adam.step(&mut model.params, &grad);
        }
        history.push(model.loss(x, y)?);
    }
    Ok((model, history))
}

pub fn cnn_fit(train: &Dataset, cfg: &TrainConfig) -> Result<Cnn1dModel> {
    Ok(cnn_train(&train.to_matrix(), train.labels(), cfg)?.0)
}

/// Scores in (0, 1) and labels by `score >= 0.5`.
pub fn cnn_predict(model: &Cnn1dModel, x: &Array2<f64>) -> Result<(Vec<f64>, Vec<Label>)> {
    let scores = model.predict_scores(x)?;
    let labels = scores.iter().map(|&s| u8::from(s >= 0.5)).collect();
    Ok((scores, labels))
}
