use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qcore::{QuantumState, SparseHermitian};

/// Fock states share the dense state type; `basis_size` is the cutoff.
pub type FockState = QuantumState;

pub const DEFAULT_CUTOFF: usize = 40;
/// Number of top Fock levels whose population must stay below [`TAIL_TOL`].
pub const TAIL_LEVELS: usize = 5;
pub const TAIL_TOL: f64 = 1e-8;

/// Smallest cutoff accepted for amplitude `|α|`: `4|α|² + 20`.
pub fn min_cutoff(alpha: C64) -> usize {
    (4.0 * alpha.norm_sqr() + 20.0).ceil() as usize
}

/// Population of the top [`TAIL_LEVELS`] levels.
pub fn tail_mass(state: &FockState) -> f64 {
    let n = state.basis_size();
    state.amplitudes()[n.saturating_sub(TAIL_LEVELS)..].iter().map(|c| c.norm_sqr()).sum()
}

fn check_cutoff(alpha: C64, cutoff: usize) -> Result<()> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::numeric("non-finite amplitude"));
    }
    let need = min_cutoff(alpha);
    if cutoff < need {
        return Err(Error::validation(format!("cutoff {cutoff} too small for |α| = {:.3}, need {need}", alpha.norm())));
    }
    Ok(())
}

/// Unnormalized `αⁿ/√(n!)` for `n < cutoff`.
fn poisson_amplitudes(alpha: C64, cutoff: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(cutoff);
    let mut c = C64::new(1.0, 0.0);
    out.push(c);
    for n in 1..cutoff {
        c = c * alpha / (n as f64).sqrt();
        out.push(c);
    }
    out
}

fn finish(amps: Vec<C64>) -> Result<FockState> {
    let state = QuantumState::normalized(amps)?;
    let tail = tail_mass(&state);
    if tail > TAIL_TOL {
        return Err(Error::validation(format!("truncation tail mass {tail:e} exceeds {TAIL_TOL:e}")));
    }
    Ok(state)
}

/// `|α⟩ = e^{−|α|²/2} Σ αⁿ/√(n!) |n⟩`, renormalized after truncation.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<FockState> {
    check_cutoff(alpha, cutoff)?;
    finish(poisson_amplitudes(alpha, cutoff))
}

/// `|C_α⟩ ∝ |α⟩ + |−α⟩`, supported on even photon numbers. Only `α²` enters,
/// so `cat_state(α)` and `cat_state(−α)` are bitwise equal.
pub fn cat_state(alpha: C64, cutoff: usize) -> Result<FockState> {
    check_cutoff(alpha, cutoff)?;
    let a2 = alpha * alpha;
    let mut amps = vec![C64::new(0.0, 0.0); cutoff];
    let mut c = C64::new(1.0, 0.0);
    amps[0] = c;
    let mut n = 2;
    while n < cutoff {
        c = c * a2 / (((n - 1) * n) as f64).sqrt();
        amps[n] = c;
        n += 2;
    }
    finish(amps)
}

/// `D(r e^{iψ})|0⟩`.
pub fn displaced_vacuum(p: &super::DisplacementParams, cutoff: usize) -> Result<FockState> {
    coherent_state(C64::from_polar(p.magnitude, p.phase), cutoff)
}

/// `H = −a†²a² + α²a†² + α*²a²`, which equals `|α|⁴ − (a†² − α*²)(a² − α²)`,
/// so cat states of amplitude `±α` are eigenstates with eigenvalue `|α|⁴`
/// (up to truncation at the top levels).
pub fn kerr_hamiltonian(alpha: C64, cutoff: usize) -> Result<SparseHermitian> {
    if cutoff < 4 {
        return Err(Error::validation(format!("Kerr Hamiltonian needs cutoff >= 4, got {cutoff}")));
    }
    let a2 = alpha * alpha;
    let mut entries = Vec::with_capacity(3 * cutoff);
    for n in 0..cutoff {
        let nf = n as f64;
        entries.push((n, n, C64::new(-nf * (nf - 1.0), 0.0)));
        if n + 2 < cutoff {
            let m = ((nf + 1.0) * (nf + 2.0)).sqrt();
            entries.push((n + 2, n, a2 * m));
            entries.push((n, n + 2, a2.conj() * m));
        }
    }
    SparseHermitian::from_entries(cutoff, entries)
}

/// `e^{−iK}` with `K = a†²a²`, i.e. phase `e^{−i n(n−1)}` on `|n⟩`.
pub fn kerr_gate(state: &FockState) -> FockState {
    let amps: Vec<C64> = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let k = (n * n.saturating_sub(1)) as f64;
            c * C64::from_polar(1.0, -k)
        })
        .collect();
    QuantumState::new(amps).expect("diagonal unitary preserves norm")
}

pub fn mean_photon_number(state: &FockState) -> f64 {
    state.amplitudes().iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
}
