use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::fock::FockState;
use crate::error::{Error, Result};
use crate::qcore::OutcomeDistribution;
use crate::seed::rng_from_seed;

/// Gauss–Legendre nodes per histogram bin.
const NODES_PER_BIN: usize = 6;
/// Width of the quadrature panels covering the tails outside `x_range`.
const TAIL_PANEL: f64 = 0.25;
const NODES_PER_TAIL_PANEL: usize = 8;

/// Binned measurement of `x_θ = (e^{iθ}a† + e^{−iθ}a)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomodyneSpec {
    pub theta: f64,
    pub n_bins: usize,
    pub x_range: (f64, f64),
}

impl HomodyneSpec {
    pub fn new(theta: f64) -> Self {
        Self { theta, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.x_range;
        if self.n_bins == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::validation(format!("invalid homodyne binning {:?} over {} bins", self.x_range, self.n_bins)));
        }
        if !self.theta.is_finite() {
            return Err(Error::validation("non-finite quadrature angle"));
        }
        Ok(())
    }
}

impl Default for HomodyneSpec {
    fn default() -> Self {
        Self { theta: 0.0, n_bins: 100, x_range: (-4.0, 4.0) }
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `φ_n(x) = 2^{1/4} ψ_n(√2 x)` for `n < cutoff`, with `ψ_n` the standard
/// Hermite functions; vacuum density `|φ_0|²` has variance 1/4.
fn quadrature_eigenfunctions(x: f64, cutoff: usize, out: &mut [f64]) {
    let y = std::f64::consts::SQRT_2 * x;
    let scale = 2f64.powf(0.25);
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * y * y).exp();
    for n in 0..cutoff {
        out[n] = scale * cur;
        let next = (2.0 / (n as f64 + 1.0)).sqrt() * y * cur - (n as f64 / (n as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
}

/// Precomputed quadrature for binned homodyne statistics at fixed binning and
/// cutoff. Mass beyond `x_range` is integrated out to where every retained
/// eigenfunction has decayed and added to the edge bins.
#[derive(Debug, Clone)]
pub struct HomodyneGrid {
    n_bins: usize,
    x_range: (f64, f64),
    cutoff: usize,
    bins: Vec<usize>,
    weights: Vec<f64>,
    nodes: Vec<f64>,
    phi: Vec<f64>,
}

impl HomodyneGrid {
    pub fn new(n_bins: usize, x_range: (f64, f64), cutoff: usize) -> Result<Self> {
        HomodyneSpec { theta: 0.0, n_bins, x_range }.validate()?;
        if cutoff == 0 {
            return Err(Error::validation("cutoff must be positive"));
        }
        let (lo, hi) = x_range;
        let (gx, gw) = gauss_legendre(NODES_PER_BIN);
        let (tx, tw) = gauss_legendre(NODES_PER_TAIL_PANEL);
        let width = (hi - lo) / n_bins as f64;
        let mut bins = Vec::new();
        let mut weights = Vec::new();
        let mut nodes = Vec::new();
        let mut panel = |a: f64, b: f64, bin: usize, rx: &[f64], rw: &[f64]| {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (x, w) in rx.iter().zip(rw) {
                nodes.push(mid + half * x);
                weights.push(half * w);
                bins.push(bin);
            }
        };
        for b in 0..n_bins {
            panel(lo + b as f64 * width, lo + (b + 1) as f64 * width, b, &gx, &gw);
        }
        // Beyond the classical turning point √(n + 1/2) all φ_n decay like
        // Gaussians; eight more units leave nothing representable.
        let reach = (cutoff as f64 + 0.5).sqrt() + 8.0;
        let mut a = hi;
        while a < reach {
            panel(a, a + TAIL_PANEL, n_bins - 1, &tx, &tw);
            a += TAIL_PANEL;
        }
        let mut b = lo;
        while b > -reach {
            panel(b - TAIL_PANEL, b, 0, &tx, &tw);
            b -= TAIL_PANEL;
        }
        let mut phi = vec![0.0; nodes.len() * cutoff];
        for (k, &x) in nodes.iter().enumerate() {
            quadrature_eigenfunctions(x, cutoff, &mut phi[k * cutoff..(k + 1) * cutoff]);
        }
        Ok(Self { n_bins, x_range, cutoff, bins, weights, nodes, phi })
    }

    pub fn for_spec(spec: &HomodyneSpec, cutoff: usize) -> Result<Self> {
        Self::new(spec.n_bins, spec.x_range, cutoff)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.x_range
    }

    /// Quadrature density `|Σ c_n e^{−inθ} φ_n(x)|²` at one point.
    pub fn density(state: &FockState, theta: f64, x: f64) -> f64 {
        let mut phi = vec![0.0; state.basis_size()];
        quadrature_eigenfunctions(x, state.basis_size(), &mut phi);
        rotated(state, theta).iter().zip(&phi).map(|(c, p)| c * p).sum::<C64>().norm_sqr()
    }

    /// Bin masses before renormalization; they sum to the state norm up to
    /// quadrature error.
    pub fn raw_bins(&self, state: &FockState, theta: f64) -> Result<Vec<f64>> {
        if state.basis_size() != self.cutoff {
            return Err(Error::validation(format!(
                "state cutoff {} does not match grid cutoff {}",
                state.basis_size(),
                self.cutoff
            )));
        }
        let coeffs = rotated(state, theta);
        let mut out = vec![0.0; self.n_bins];
        for (k, row) in self.phi.chunks_exact(self.cutoff).enumerate() {
            let amp: C64 = coeffs.iter().zip(row).map(|(c, p)| c * p).sum();
            out[self.bins[k]] += self.weights[k] * amp.norm_sqr();
        }
        Ok(out)
    }

    pub fn distribution(&self, state: &FockState, theta: f64) -> Result<OutcomeDistribution> {
        OutcomeDistribution::from_weights(self.raw_bins(state, theta)?)
    }

    /// Quadrature abscissae, mostly for diagnostics.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

fn rotated(state: &FockState, theta: f64) -> Vec<C64> {
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, c)| c * C64::from_polar(1.0, -(n as f64) * theta))
        .collect()
}

/// One-off binned homodyne distribution. Callers measuring repeatedly at the
/// same cutoff should keep a [`HomodyneGrid`].
pub fn homodyne_distribution(state: &FockState, spec: &HomodyneSpec) -> Result<OutcomeDistribution> {
    spec.validate()?;
    HomodyneGrid::for_spec(spec, state.basis_size())?.distribution(state, spec.theta)
}

/// `count` distinct random quadrature angles in `[0, π)`, one uniform draw
/// inside each of the `count` equal sectors so that no two angles coincide
/// by chance.
pub fn sample_quadrature_angles(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let w = PI / count.max(1) as f64;
    (0..count).map(|i| (i as f64 + rng.random_range(0.0..1.0)) * w).collect()
}
