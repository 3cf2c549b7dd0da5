use super::{ModelError, ModelParams, TrainConfig, LAYER_NAMES};

/// First and second moment estimates, shaped like the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub first_moment: ModelParams,
    pub second_moment: ModelParams,
    pub step: u64,
}

impl AdamState {
    pub fn new() -> Self {
        AdamState { first_moment: ModelParams::zeros(), second_moment: ModelParams::zeros(), step: 0 }
    }
}

impl Default for AdamState {
    fn default() -> Self {
        Self::new()
    }
}

/// One bias-corrected Adam update. Parameters and state are left untouched
/// when any gradient is non-finite.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &ModelParams,
    state: &mut AdamState,
    cfg: &TrainConfig,
) -> Result<(), ModelError> {
    grads.check_shapes()?;
    params.check_shapes()?;
    for (layer, name) in grads.layers.iter().zip(LAYER_NAMES) {
        if !layer.weights.iter().chain(&layer.bias).all(|g| g.is_finite()) {
            return Err(ModelError::NonFiniteGradient { layer: name });
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let correct1 = 1.0 - cfg.beta1.powi(t);
    let correct2 = 1.0 - cfg.beta2.powi(t);
    let moments = state.first_moment.values_mut().zip(state.second_moment.values_mut());
    for ((theta, g), (m, v)) in params.values_mut().zip(grads.values()).zip(moments) {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / correct1;
        let v_hat = *v / correct2;
        *theta -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = ModelParams::init(3);
        let before = p.clone();
        let mut state = AdamState::new();
        adam_step(&mut p, &ModelParams::zeros(), &mut state, &TrainConfig::default()).unwrap();
        assert_eq!(p, before);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn first_step_closed_form() {
        let cfg = TrainConfig::default();
        let mut p = ModelParams::zeros();
        let mut g = ModelParams::zeros();
        g.set_output_bias(1.0);
        let mut state = AdamState::new();
        adam_step(&mut p, &g, &mut state, &cfg).unwrap();
        assert!((p.output_bias() - (-cfg.learning_rate / (1.0 + cfg.epsilon))).abs() < 1e-18);
        assert!(p.layers[0].weights.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn pure_function_of_inputs() {
        let cfg = TrainConfig::default();
        let mut g = ModelParams::init(8);
        g.values_mut().for_each(|v| *v *= 0.1);
        let run = || {
            let mut p = ModelParams::init(9);
            let mut s = AdamState::new();
            adam_step(&mut p, &g, &mut s, &cfg).unwrap();
            adam_step(&mut p, &g, &mut s, &cfg).unwrap();
            (p, s)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rejects_non_finite_gradient() {
        let mut p = ModelParams::init(1);
        let before = p.clone();
        let mut g = ModelParams::zeros();
        g.layers[1].weights[5] = f64::NAN;
        let mut state = AdamState::new();
        let err = adam_step(&mut p, &g, &mut state, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, ModelError::NonFiniteGradient { layer: "hidden2" }));
        assert_eq!(p, before);
        assert_eq!(state.step, 0);
    }
}
