use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { learning_rate: 0.01, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First and second moment estimates after `t` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        AdamState { m: vec![0.0; dim], v: vec![0.0; dim], t: 0 }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(params: &[f64], state: &AdamState, grad: &[f64], cfg: &AdamConfig) -> Result<(Vec<f64>, AdamState)> {
    let dim = params.len();
    if grad.len() != dim || state.m.len() != dim || state.v.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "adam dimensions disagree: params {dim}, grad {}, moments {}/{}",
            grad.len(),
            state.m.len(),
            state.v.len()
        )));
    }
    let t = state.t + 1;
    let c1 = 1.0 - cfg.beta1.powf(t as f64);
    let c2 = 1.0 - cfg.beta2.powf(t as f64);
    let mut next = AdamState { m: Vec::with_capacity(dim), v: Vec::with_capacity(dim), t };
    let mut out = Vec::with_capacity(dim);
    for i in 0..dim {
        let m = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
        let v = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        out.push(params[i] - cfg.learning_rate * (m / c1) / ((v / c2).sqrt() + cfg.eps));
        next.m.push(m);
        next.v.push(v);
    }
    Ok((out, next))
}
