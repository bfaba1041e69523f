use num_complex::Complex64 as C64;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::Rng;

/// Norm tolerance for a valid state.
pub(crate) const NORM_TOL: f64 = 1e-10;

/// A pure state as a dense amplitude vector over a spin or Fock basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumState {
    amplitudes: Vec<C64>,
}

impl QuantumState {
    /// Wraps `amplitudes`, which must already have unit norm.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::validation("state must have at least one amplitude"));
        }
        let norm = norm(&amplitudes);
        if !norm.is_finite() {
            return Err(Error::numeric("non-finite state amplitudes"));
        }
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::validation(format!(
                "state norm {norm} differs from 1 by more than {NORM_TOL:e}"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes `amplitudes` and wraps them.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if !n.is_finite() || n == 0.0 {
            return Err(Error::numeric(format!("cannot normalize vector of norm {n}")));
        }
        for a in &mut amplitudes {
            *a /= n;
        }
        Self::new(amplitudes)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::validation(format!("basis index {index} >= dimension {dim}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: amps })
    }

    /// Haar-random state drawn from a seeded generator.
    pub fn random(dim: usize, rng: &mut Rng) -> Result<Self> {
        let amps = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amps)
    }

    /// `|+⟩^{⊗n}`.
    pub fn plus_product(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self { amplitudes: vec![a; dim] }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn basis_size(&self) -> usize {
        self.amplitudes.len()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.basis_size() != other.basis_size() {
            return Err(Error::validation(format!(
                "dimension mismatch: {} vs {}",
                self.basis_size(),
                other.basis_size()
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Multiplies by a global phase `e^{iφ}`.
    pub fn with_phase(&self, phi: f64) -> Self {
        let p = C64::from_polar(1.0, phi);
        Self { amplitudes: self.amplitudes.iter().map(|a| a * p).collect() }
    }

    /// Fixes the global phase so that the largest-magnitude amplitude is real
    /// and positive (first index wins ties).
    pub fn canonical_phase(mut self) -> Self {
        fix_phase(&mut self.amplitudes);
        self
    }
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn fix_phase(v: &mut [C64]) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, a) in v.iter().enumerate() {
        let m = a.norm_sqr();
        if m > best_mag * (1.0 + 1e-9) {
            best = i;
            best_mag = m;
        }
    }
    if best_mag > 0.0 {
        let phase = v[best].conj() / v[best].norm();
        for a in v.iter_mut() {
            *a *= phase;
        }
    }
}
