use super::hamiltonian::{IsingParams, XxzGrid, XxzParams};
use crate::error::{Error, Result};

/// Action index → `(ΔJ/J', Δδ)` in grid steps. Every non-identity move of
/// the 3×3 stencil appears exactly once.
pub const XXZ_MOVES: [(i32, i32); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// Shifts `(J/J', δ)` by one stencil move (±0.15, ±0.2), clamps to the box
/// and snaps to the nearest grid node.
pub fn apply_action_xxz(p: &XxzParams, action: usize, grid: &XxzGrid) -> Result<XxzParams> {
    let (dj, dd) = *XXZ_MOVES
        .get(action)
        .ok_or_else(|| Error::validation(format!("XXZ action {action} not in [0, 8)")))?;
    let (i, k) = grid.snap(
        p.j_ratio + f64::from(dj) * grid.j_step(),
        p.delta + f64::from(dd) * grid.delta_step(),
    );
    Ok(grid.params(i, k, p.chain_length))
}

/// Shifts every coupling by `move · step` with moves in `{−1, 0, +1}`,
/// clamping to `[−1, 1]`.
pub fn apply_action_ising(p: &IsingParams, moves: &[i32], step: f64) -> Result<IsingParams> {
    if moves.len() != p.couplings.len() {
        return Err(Error::validation(format!(
            "expected {} coupling moves, got {}",
            p.couplings.len(),
            moves.len()
        )));
    }
    if let Some(m) = moves.iter().find(|m| !(-1..=1).contains(*m)) {
        return Err(Error::validation(format!("coupling move {m} not in {{-1, 0, 1}}")));
    }
    let couplings = p
        .couplings
        .iter()
        .zip(moves)
        .map(|(j, &m)| {
            let v = j + f64::from(m) * step;
            // Snap to the step lattice so repeated moves do not accumulate drift.
            let snapped = (v / step).round() * step;
            let v = if (snapped - v).abs() < 1e-9 { snapped } else { v };
            v.clamp(-1.0, 1.0)
        })
        .collect();
    Ok(IsingParams { couplings })
}
