//! The state-value regressor: x → tanh(64) → tanh(32) → linear scalar,
//! trained with mean squared error and Adam. Double precision throughout.

mod adam;
mod io;
mod train;

use thiserror::Error;

use crate::dataset::{EncodedExample, INPUT_DIM};
use crate::rng::SplitMix64;

pub use adam::{adam_step, AdamState};
pub use io::{load_model, read_model, save_model, write_model, ModelFile, MODEL_HEADER};
pub use train::{evaluate_mse, train, train_with_progress, EpochStats, TrainConfig};

pub const HIDDEN1: usize = 64;
pub const HIDDEN2: usize = 32;
pub const LAYER_NAMES: [&str; 3] = ["hidden1", "hidden2", "output"];

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("input has length {found}, expected {expected}")]
    InputShape { expected: usize, found: usize },
    #[error("layer {layer}: expected shape {expected:?}, found {found:?}")]
    LayerShape { layer: String, expected: (usize, usize), found: (usize, usize) },
    #[error("loss needs a non-empty batch")]
    EmptyBatch,
    #[error("non-finite gradient in layer {layer}")]
    NonFiniteGradient { layer: &'static str },
    #[error("training diverged: non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported model header '{0}'")]
    Version(String),
    #[error("model file line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("model file ended early: {0}")]
    Truncated(String),
}

/// A fully connected layer; `weights` is row-major `rows × cols` (out × in).
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Dense {
        Dense { rows, cols, weights: vec![0.0; rows * cols], bias: vec![0.0; rows] }
    }

    fn glorot(rows: usize, cols: usize, rng: &mut SplitMix64) -> Dense {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        let weights = (0..rows * cols).map(|_| rng.uniform(-limit, limit)).collect();
        Dense { rows, cols, weights, bias: vec![0.0; rows] }
    }

    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.cols + col]
    }

    fn row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.cols..(r + 1) * self.cols]
    }

    /// out = W·x + b.
    fn affine(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.bias[r] + self.row(r).iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }

    /// W·x + b for inputs that are mostly exact zeros (one-hot vectors).
    fn affine_sparse(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.bias);
        for (c, &v) in x.iter().enumerate() {
            if v != 0.0 {
                for (r, o) in out.iter_mut().enumerate() {
                    *o += self.weights[r * self.cols + c] * v;
                }
            }
        }
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(&self.bias)
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.bias.iter_mut())
    }
}

/// Weights and biases of the three layers.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub layers: [Dense; 3],
}

impl ModelParams {
    pub fn zeros() -> ModelParams {
        ModelParams {
            layers: [Dense::zeros(HIDDEN1, INPUT_DIM), Dense::zeros(HIDDEN2, HIDDEN1), Dense::zeros(1, HIDDEN2)],
        }
    }

    /// Glorot-uniform weights, zero biases, deterministic in `seed`.
    pub fn init(seed: u64) -> ModelParams {
        Self::init_with(&mut SplitMix64::new(seed))
    }

    pub(crate) fn init_with(rng: &mut SplitMix64) -> ModelParams {
        ModelParams {
            layers: [
                Dense::glorot(HIDDEN1, INPUT_DIM, rng),
                Dense::glorot(HIDDEN2, HIDDEN1, rng),
                Dense::glorot(1, HIDDEN2, rng),
            ],
        }
    }

    pub fn output_bias(&self) -> f64 {
        self.layers[2].bias[0]
    }

    pub fn set_output_bias(&mut self, value: f64) {
        self.layers[2].bias[0] = value;
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(Dense::values)
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(Dense::values_mut)
    }

    pub fn check_shapes(&self) -> Result<(), ModelError> {
        let expected = [(HIDDEN1, INPUT_DIM), (HIDDEN2, HIDDEN1), (1, HIDDEN2)];
        for ((layer, name), want) in self.layers.iter().zip(LAYER_NAMES).zip(expected) {
            let found = (layer.rows, layer.cols);
            if found != want || layer.weights.len() != want.0 * want.1 || layer.bias.len() != want.0 {
                return Err(ModelError::LayerShape { layer: name.to_string(), expected: want, found });
            }
        }
        Ok(())
    }

    /// |output| can never exceed ‖W3‖₁ + |b3| because hidden activations lie in [-1, 1].
    pub fn output_bound(&self) -> f64 {
        self.layers[2].weights.iter().map(|w| w.abs()).sum::<f64>() + self.output_bias().abs()
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64, ModelError> {
        if x.len() != INPUT_DIM {
            return Err(ModelError::InputShape { expected: INPUT_DIM, found: x.len() });
        }
        Ok(Activations::compute(self, x).output)
    }
}

/// Intermediate values of one forward pass, kept for backpropagation.
struct Activations {
    hidden1: [f64; HIDDEN1],
    hidden2: [f64; HIDDEN2],
    output: f64,
}

impl Activations {
    fn compute(params: &ModelParams, x: &[f64]) -> Activations {
        let [l1, l2, l3] = &params.layers;
        let mut hidden1 = [0.0; HIDDEN1];
        l1.affine_sparse(x, &mut hidden1);
        hidden1.iter_mut().for_each(|v| *v = v.tanh());
        let mut hidden2 = [0.0; HIDDEN2];
        l2.affine(&hidden1, &mut hidden2);
        hidden2.iter_mut().for_each(|v| *v = v.tanh());
        let mut output = [0.0];
        l3.affine(&hidden2, &mut output);
        Activations { hidden1, hidden2, output: output[0] }
    }
}

fn check_batch(batch: &[&EncodedExample]) -> Result<(), ModelError> {
    if batch.is_empty() {
        return Err(ModelError::EmptyBatch);
    }
    if let Some(bad) = batch.iter().find(|e| e.x.len() != INPUT_DIM) {
        return Err(ModelError::InputShape { expected: INPUT_DIM, found: bad.x.len() });
    }
    Ok(())
}

/// Mean squared error over `batch` and its exact gradient w.r.t. every parameter.
pub fn loss_and_gradients(params: &ModelParams, batch: &[EncodedExample]) -> Result<(f64, ModelParams), ModelError> {
    let mut grads = ModelParams::zeros();
    let refs: Vec<&EncodedExample> = batch.iter().collect();
    let loss = accumulate_gradients(params, &refs, &mut grads)?;
    Ok((loss, grads))
}

/// Overwrites `grads` with the batch gradient and returns the batch MSE.
pub(crate) fn accumulate_gradients(
    params: &ModelParams,
    batch: &[&EncodedExample],
    grads: &mut ModelParams,
) -> Result<f64, ModelError> {
    check_batch(batch)?;
    grads.values_mut().for_each(|g| *g = 0.0);
    let [l1, l2, l3] = &params.layers;
    let [g1, g2, g3] = &mut grads.layers;
    let n = batch.len() as f64;
    let mut loss = 0.0;
    let mut delta2 = [0.0; HIDDEN2];
    let mut delta1 = [0.0; HIDDEN1];

    for example in batch {
        let act = Activations::compute(params, &example.x);
        let err = act.output - example.y;
        loss += err * err;
        let d_out = 2.0 * err / n;

        g3.bias[0] += d_out;
        for (j, a) in act.hidden2.iter().enumerate() {
            g3.weights[j] += d_out * a;
            delta2[j] = d_out * l3.weights[j] * (1.0 - a * a);
        }

        delta1.iter_mut().for_each(|d| *d = 0.0);
        for (r, &d) in delta2.iter().enumerate() {
            g2.bias[r] += d;
            let grad_row = &mut g2.weights[r * HIDDEN1..(r + 1) * HIDDEN1];
            for ((g, a), (acc, w)) in grad_row.iter_mut().zip(&act.hidden1).zip(delta1.iter_mut().zip(l2.row(r))) {
                *g += d * a;
                *acc += d * w;
            }
        }
        for (d, a) in delta1.iter_mut().zip(&act.hidden1) {
            *d *= 1.0 - a * a;
        }

        for (r, &d) in delta1.iter().enumerate() {
            g1.bias[r] += d;
        }
        for (c, &v) in example.x.iter().enumerate() {
            if v != 0.0 {
                for (r, &d) in delta1.iter().enumerate() {
                    g1.weights[r * l1.cols + c] += d * v;
                }
            }
        }
    }
    Ok(loss / n)
}
