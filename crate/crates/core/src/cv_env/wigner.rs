use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::fock::FockState;
use crate::error::{Error, Result};

/// Phase-space grid in the quadratures `x = (a + a†)/2`, `p = (a − a†)/(2i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
}

impl WignerGrid {
    /// `n × n` uniform grid on `[−half_width, half_width]²`.
    pub fn square(half_width: f64, n: usize) -> Self {
        let axis: Vec<f64> = (0..n)
            .map(|i| -half_width + 2.0 * half_width * i as f64 / (n.max(2) - 1) as f64)
            .collect();
        Self { xs: axis.clone(), ps: axis }
    }
}

/// Wigner function `W(x, p)` normalized so that `∫ W dx dp = 1`; the vacuum is
/// `(2/π) e^{−2(x² + p²)}`. Rows index `xs`, columns index `ps`.
///
/// Evaluated with the Laguerre recurrence over `|m⟩⟨n|` components, which is
/// stable for cutoffs far beyond the direct factorial formula.
pub fn wigner_function(state: &FockState, grid: &WignerGrid) -> Result<DMatrix<f64>> {
    if grid.xs.iter().chain(&grid.ps).any(|v| !v.is_finite()) {
        return Err(Error::validation("non-finite Wigner grid"));
    }
    let c = state.amplitudes();
    let m_dim = c.len();
    let mut out = DMatrix::zeros(grid.xs.len(), grid.ps.len());
    let mut w = vec![C64::new(0.0, 0.0); m_dim];
    for (i, &x) in grid.xs.iter().enumerate() {
        for (j, &p) in grid.ps.iter().enumerate() {
            let a = C64::new(x, p);
            let rho = |m: usize, n: usize| c[m] * c[n].conj();
            w[0] = C64::new((-2.0 * a.norm_sqr()).exp() / std::f64::consts::PI, 0.0);
            let mut total = rho(0, 0).re * w[0].re;
            for n in 1..m_dim {
                w[n] = 2.0 * a * w[n - 1] / (n as f64).sqrt();
                total += 2.0 * (rho(0, n) * w[n]).re;
            }
            for m in 1..m_dim {
                let sm = (m as f64).sqrt();
                let mut temp = w[m];
                w[m] = (2.0 * a.conj() * temp - sm * w[m - 1]) / sm;
                total += (rho(m, m) * w[m]).re;
                for n in m + 1..m_dim {
                    let next = (2.0 * a * w[n - 1] - sm * temp) / (n as f64).sqrt();
                    temp = w[n];
                    w[n] = next;
                    total += 2.0 * (rho(m, n) * w[n]).re;
                }
            }
            out[(i, j)] = 2.0 * total;
        }
    }
    Ok(out)
}
