use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::SparseHermitian;

/// Magnitude of the uniform `Σ Zᵢ` field added before ground-state solves so
/// that (near-)degenerate ground spaces resolve to a reproducible state.
pub const SYMMETRY_BREAKING_FIELD: f64 = 1e-6;

/// Discretization of `(J/J', δ) ∈ [0, 3] × [0, 4]` into 21 × 21 nodes.
///
/// Node spacing equals the action step sizes (0.15 and 0.2), so one action
/// moves exactly one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XxzGrid {
    pub nodes: usize,
    pub j_max: f64,
    pub delta_max: f64,
}

impl Default for XxzGrid {
    fn default() -> Self {
        Self { nodes: 21, j_max: 3.0, delta_max: 4.0 }
    }
}

impl XxzGrid {
    pub fn j_step(&self) -> f64 {
        self.j_max / (self.nodes - 1) as f64
    }

    pub fn delta_step(&self) -> f64 {
        self.delta_max / (self.nodes - 1) as f64
    }

    pub fn j_value(&self, i: usize) -> f64 {
        i as f64 * self.j_step()
    }

    pub fn delta_value(&self, k: usize) -> f64 {
        k as f64 * self.delta_step()
    }

    /// Nearest node indices of `(j_ratio, delta)` after clamping to the box.
    pub fn snap(&self, j_ratio: f64, delta: f64) -> (usize, usize) {
        let last = (self.nodes - 1) as f64;
        let i = (j_ratio.clamp(0.0, self.j_max) / self.j_step()).round().clamp(0.0, last);
        let k = (delta.clamp(0.0, self.delta_max) / self.delta_step()).round().clamp(0.0, last);
        (i as usize, k as usize)
    }

    /// All nodes in row-major order `(i, k)` with `i` the `J/J'` index.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.nodes).flat_map(move |i| (0..self.nodes).map(move |k| (i, k)))
    }

    pub fn node_index(&self, i: usize, k: usize) -> usize {
        i * self.nodes + k
    }

    pub fn params(&self, i: usize, k: usize, chain_length: usize) -> XxzParams {
        XxzParams { j_ratio: self.j_value(i), delta: self.delta_value(k), chain_length }
    }
}

/// Parameters of the bond-alternating XXZ chain with `J' = 1`, `J = j_ratio`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XxzParams {
    pub j_ratio: f64,
    pub delta: f64,
    pub chain_length: usize,
}

impl XxzParams {
    pub fn clamped(self) -> Self {
        Self { j_ratio: self.j_ratio.clamp(0.0, 3.0), delta: self.delta.clamp(0.0, 4.0), ..self }
    }
}

/// `H = Σ_b J_b (X_b X_{b+1} + Y_b Y_{b+1} + δ Z_b Z_{b+1})` on an open chain,
/// with `J_b = J` on even bonds `(0,1), (2,3), …` and `J_b = J' = 1` on the odd
/// bonds in between.
pub fn build_xxz_hamiltonian(p: &XxzParams) -> Result<SparseHermitian> {
    let l = p.chain_length;
    if l < 4 || l % 2 != 0 || l > 20 {
        return Err(Error::validation(format!("XXZ chain length must be even in [4, 20], got {l}")));
    }
    let p = p.clamped();
    let dim = 1usize << l;
    let mut entries = Vec::with_capacity(dim * l);
    for s in 0..dim {
        let bit = |q: usize| (s >> (l - 1 - q)) & 1;
        let mut diag = 0.0;
        for b in 0..l - 1 {
            let coupling = if b % 2 == 0 { p.j_ratio } else { 1.0 };
            if bit(b) == bit(b + 1) {
                diag += coupling * p.delta;
            } else {
                diag -= coupling * p.delta;
                let flipped = s ^ (1 << (l - 1 - b)) ^ (1 << (l - 2 - b));
                entries.push((flipped, s, C64::new(2.0 * coupling, 0.0)));
            }
        }
        entries.push((s, s, C64::new(diag, 0.0)));
    }
    SparseHermitian::from_entries(dim, entries)
}

/// Couplings `J_0 … J_{L−2}` of the open transverse-field Ising chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub couplings: Vec<f64>,
}

impl IsingParams {
    pub fn zeros(n_spins: usize) -> Self {
        Self { couplings: vec![0.0; n_spins.saturating_sub(1)] }
    }

    pub fn n_spins(&self) -> usize {
        self.couplings.len() + 1
    }

    pub fn clamped(&self) -> Self {
        Self { couplings: self.couplings.iter().map(|j| j.clamp(-1.0, 1.0)).collect() }
    }
}

/// `H = −Σᵢ Jᵢ Zᵢ Zᵢ₊₁ − Σⱼ Xⱼ`.
pub fn build_ising_hamiltonian(p: &IsingParams) -> Result<SparseHermitian> {
    let l = p.n_spins();
    if l < 2 || l > 20 {
        return Err(Error::validation(format!("Ising chain needs 2..=20 spins, got {l}")));
    }
    let p = p.clamped();
    let dim = 1usize << l;
    let mut entries = Vec::with_capacity(dim * (l + 1));
    for s in 0..dim {
        let z = |q: usize| if (s >> (l - 1 - q)) & 1 == 0 { 1.0 } else { -1.0 };
        let diag: f64 = p.couplings.iter().enumerate().map(|(i, j)| -j * z(i) * z(i + 1)).sum();
        entries.push((s, s, C64::new(diag, 0.0)));
        for q in 0..l {
            entries.push((s ^ (1 << (l - 1 - q)), s, C64::new(-1.0, 0.0)));
        }
    }
    SparseHermitian::from_entries(dim, entries)
}

/// Diagonal of `h Σ Zᵢ` on `n_qubits` qubits.
pub fn longitudinal_field(n_qubits: usize, h: f64) -> Vec<f64> {
    (0..1usize << n_qubits)
        .map(|s| {
            let ones = s.count_ones() as f64;
            h * (n_qubits as f64 - 2.0 * ones)
        })
        .collect()
}
