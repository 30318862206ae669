use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Moment accumulators for a list of parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct OptState {
    pub config: AdamConfig,
    pub step: u64,
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
}

impl OptState {
    /// Fresh state for tensors of the given lengths.
    pub fn new(config: AdamConfig, shapes: &[usize]) -> Self {
        OptState {
            config,
            step: 0,
            first_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
///
/// Fails with `NonFinite` if any updated parameter is NaN or infinite.
pub fn adam_step(params: &mut [&mut [f64]], grads: &[&[f64]], state: &mut OptState) -> Result<(), NumericsError> {
    if params.len() != grads.len() || params.len() != state.first_moment.len() {
        return Err(NumericsError::ShapeMismatch {
            op: "adam_step",
            left: (params.len(), 1),
            right: (grads.len(), state.first_moment.len()),
        });
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() || p.len() != state.first_moment[i].len() {
            return Err(NumericsError::ShapeMismatch { op: "adam_step", left: (p.len(), 1), right: (g.len(), 1) });
        }
    }
    state.step += 1;
    let AdamConfig { learning_rate, beta1, beta2, epsilon } = state.config;
    let t = state.step as i32;
    let correction1 = 1.0 - beta1.powi(t);
    let correction2 = 1.0 - beta2.powi(t);
    let mut finite = true;
    for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let m = &mut state.first_moment[i];
        let v = &mut state.second_moment[i];
        for j in 0..p.len() {
            m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
            v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
            let m_hat = m[j] / correction1;
            let v_hat = v[j] / correction2;
            p[j] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            finite &= p[j].is_finite();
        }
    }
    if finite {
        Ok(())
    } else {
        Err(NumericsError::NonFinite)
    }
}
