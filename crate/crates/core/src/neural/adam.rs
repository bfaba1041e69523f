use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, MlpGrads};
use crate::error::{Error, Result};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Moment accumulators for one network, flattened in parameter order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(net: &Mlp) -> Self {
        let n = net.n_params();
        Self { m: vec![0.0; n], v: vec![0.0; n], step: 0, beta1: ADAM_BETA1, beta2: ADAM_BETA2, eps: ADAM_EPS }
    }
}

/// One bias-corrected Adam step that *decreases* the loss whose gradient is
/// `grads`; callers maximizing an objective pass its negated gradient.
pub fn adam_step(net: &mut Mlp, grads: &MlpGrads, state: &mut AdamState, lr: f64) -> Result<()> {
    if !(lr.is_finite() && lr > 0.0) {
        return Err(Error::validation(format!("learning rate must be positive, got {lr}")));
    }
    if state.m.len() != net.n_params() {
        return Err(Error::validation("optimizer state does not match network"));
    }
    if grads.slices().flatten().any(|g| !g.is_finite()) {
        return Err(Error::numeric("non-finite gradient"));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, eps) = (state.beta1, state.beta2, state.eps);
    let mut k = 0;
    for (p, g) in net.param_slices_mut().zip(grads.slices()) {
        for (w, &gi) in p.iter_mut().zip(g) {
            let m = &mut state.m[k];
            let v = &mut state.v[k];
            *m = b1 * *m + (1.0 - b1) * gi;
            *v = b2 * *v + (1.0 - b2) * gi * gi;
            *w -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            k += 1;
        }
    }
    Ok(())
}

/// Global L2 norm over several gradient sets.
pub fn gradient_norm(grads: &[&MlpGrads]) -> f64 {
    grads.iter().flat_map(|g| g.slices()).flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Rescales all gradients jointly so their global norm is at most
/// `max_norm`. Returns the norm before clipping.
pub fn clip_gradient_norm(grads: &mut [&mut MlpGrads], max_norm: f64) -> Result<f64> {
    if !(max_norm.is_finite() && max_norm > 0.0) {
        return Err(Error::validation(format!("max_norm must be positive, got {max_norm}")));
    }
    let norm = gradient_norm(&grads.iter().map(|g| &**g).collect::<Vec<_>>());
    if norm > max_norm {
        let s = max_norm / norm;
        for g in grads.iter_mut() {
            g.scale(s);
        }
    }
    Ok(norm)
}
