use super::{accumulate_gradients, adam_step, AdamState, ModelError, ModelParams};
use crate::dataset::{DatasetSplit, EncodedExample};
use crate::rng::SplitMix64;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 64,
            epochs: 100,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidConfig(msg));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad(format!("betas must be in [0, 1), got {} and {}", self.beta1, self.beta2));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    pub train_mse: f64,
    /// `None` when the validation set is empty.
    pub val_mse: Option<f64>,
}

/// Mean squared error of `params` over `examples`; `None` for an empty set.
pub fn evaluate_mse(params: &ModelParams, examples: &[EncodedExample]) -> Result<Option<f64>, ModelError> {
    if examples.is_empty() {
        return Ok(None);
    }
    let mut total = 0.0;
    for e in examples {
        let err = params.forward(&e.x)? - e.y;
        total += err * err;
    }
    Ok(Some(total / examples.len() as f64))
}

/// Shuffled mini-batch Adam for `cfg.epochs` epochs, starting from
/// `ModelParams::init`. The same seed draws the initial weights and then the
/// per-epoch shuffles, so the run is a pure function of (split, cfg).
pub fn train(split: &DatasetSplit, cfg: &TrainConfig) -> Result<(ModelParams, Vec<EpochStats>), ModelError> {
    train_with_progress(split, cfg, &mut |_| {})
}

/// [`train`], calling `on_epoch` after every epoch.
pub fn train_with_progress(
    split: &DatasetSplit,
    cfg: &TrainConfig,
    on_epoch: &mut dyn FnMut(&EpochStats),
) -> Result<(ModelParams, Vec<EpochStats>), ModelError> {
    cfg.validate()?;
    if split.train.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let mut rng = SplitMix64::new(cfg.seed);
    let mut params = ModelParams::init_with(&mut rng);
    let mut state = AdamState::new();
    let mut grads = ModelParams::zeros();
    let mut order: Vec<usize> = (0..split.train.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut batch: Vec<&EncodedExample> = Vec::with_capacity(cfg.batch_size);

    for epoch in 1..=cfg.epochs {
        if cfg.shuffle {
            rng.shuffle(&mut order);
        }
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| &split.train[i]));
            let loss = accumulate_gradients(&params, &batch, &mut grads)?;
            if !loss.is_finite() {
                return Err(ModelError::NonFiniteLoss { epoch, batch: b });
            }
            adam_step(&mut params, &grads, &mut state, cfg)?;
        }
        let train_mse = evaluate_mse(&params, &split.train)?.expect("training set is non-empty");
        if !train_mse.is_finite() {
            return Err(ModelError::NonFiniteLoss { epoch, batch: order.len().div_ceil(cfg.batch_size) });
        }
        let val_mse = evaluate_mse(&params, &split.validation)?;
        let stats = EpochStats { epoch, train_mse, val_mse };
        on_epoch(&stats);
        history.push(stats);
    }
    Ok((params, history))
}
