use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest controllable amplitude magnitude for both CV tasks.
pub const MAX_AMPLITUDE: f64 = 3.0;
pub const DISPLACEMENT_MAGNITUDE_STEP: f64 = 0.09;
pub const DISPLACEMENT_PHASE_STEP: f64 = 0.06 * PI;

/// Action index → `(ΔRe α, ΔIm α)` in units of β.
pub const CAT_MOVES: [(i32, i32); 8] = crate::spin_env::XXZ_MOVES;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatControlParams {
    pub alpha: C64,
}

impl CatControlParams {
    pub fn new(alpha: C64) -> Self {
        Self { alpha }.clamped()
    }

    /// Shrinks `α` radially onto `|α| ≤ 3`.
    pub fn clamped(self) -> Self {
        let r = self.alpha.norm();
        if r > MAX_AMPLITUDE {
            Self { alpha: self.alpha * (MAX_AMPLITUDE / r) }
        } else {
            self
        }
    }
}

/// Input coherent amplitude `r e^{iψ}` for the process-output task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementParams {
    pub magnitude: f64,
    pub phase: f64,
}

impl DisplacementParams {
    pub fn new(magnitude: f64, phase: f64) -> Self {
        Self { magnitude: magnitude.clamp(0.0, MAX_AMPLITUDE), phase: phase.rem_euclid(TAU) }
    }

    pub fn alpha(&self) -> C64 {
        C64::from_polar(self.magnitude, self.phase)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::validation(format!("step size must be positive, got {beta}")));
    }
    Ok(())
}

/// `α ← α + β(Δre + iΔim)` for one of the eight stencil moves.
pub fn apply_action_cat(p: &CatControlParams, action: usize, beta: f64) -> Result<CatControlParams> {
    check_beta(beta)?;
    let (dr, di) = *CAT_MOVES
        .get(action)
        .ok_or_else(|| Error::validation(format!("cat action {action} not in [0, 8)")))?;
    Ok(CatControlParams { alpha: p.alpha + C64::new(f64::from(dr), f64::from(di)) * beta }.clamped())
}

/// Two independent three-way choices on `Re α` and `Im α`; index 0, 1, 2
/// mean −β, 0, +β.
pub fn apply_action_cat_factored(p: &CatControlParams, factors: [usize; 2], beta: f64) -> Result<CatControlParams> {
    check_beta(beta)?;
    if factors.iter().any(|&f| f > 2) {
        return Err(Error::validation(format!("factored cat action {factors:?} out of range")));
    }
    let d = |f: usize| f as f64 - 1.0;
    Ok(CatControlParams { alpha: p.alpha + C64::new(d(factors[0]), d(factors[1])) * beta }.clamped())
}

/// Actions 0..4 are `(+,+)`, `(+,−)`, `(−,+)`, `(−,−)` on `(r, ψ)`.
pub fn apply_action_displacement(p: &DisplacementParams, action: usize) -> Result<DisplacementParams> {
    let (sr, sp) = match action {
        0 => (1.0, 1.0),
        1 => (1.0, -1.0),
        2 => (-1.0, 1.0),
        3 => (-1.0, -1.0),
        _ => return Err(Error::validation(format!("displacement action {action} not in [0, 4)"))),
    };
    Ok(DisplacementParams::new(
        p.magnitude + sr * DISPLACEMENT_MAGNITUDE_STEP,
        p.phase + sp * DISPLACEMENT_PHASE_STEP,
    ))
}

/// Independent `{−, 0, +}` choices on the magnitude and the phase; index 0,
/// 1, 2 mean −step, 0, +step.
pub fn apply_action_displacement_factored(p: &DisplacementParams, factors: [usize; 2]) -> Result<DisplacementParams> {
    if factors.iter().any(|&f| f > 2) {
        return Err(Error::validation(format!("factored displacement action {factors:?} out of range")));
    }
    let d = |f: usize| f as f64 - 1.0;
    Ok(DisplacementParams::new(
        p.magnitude + d(factors[0]) * DISPLACEMENT_MAGNITUDE_STEP,
        p.phase + d(factors[1]) * DISPLACEMENT_PHASE_STEP,
    ))
}
