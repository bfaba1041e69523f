//! Ground-state solvers.
//!
//! Lanczos with full reorthogonalization against every stored Krylov vector
//! (applied twice per step), started from a seeded random unit vector. Small
//! operators go through a dense Hermitian eigensolver instead.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::sparse::SparseHermitian;
use super::state::{fix_phase, norm, QuantumState};
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Operators of dimension at most this go through the dense solver.
pub const DENSE_FALLBACK_DIM: usize = 64;

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: QuantumState,
    /// `‖H·ψ − E·ψ‖`.
    pub residual: f64,
    pub iterations: usize,
}

/// Ground state with the default iteration budget and tolerance `1e-10`.
pub fn ground_state(h: &SparseHermitian, seed: u64) -> Result<GroundState> {
    let max_iter = h.dimension().clamp(2, 600);
    lanczos_ground_state(h, max_iter, 1e-10, seed)
}

/// Lowest eigenpair of `h`. Dimensions up to [`DENSE_FALLBACK_DIM`] are
/// solved densely; larger ones with [`lanczos_krylov`].
pub fn lanczos_ground_state(
    h: &SparseHermitian,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> Result<GroundState> {
    check_input(h, tol)?;
    if h.dimension() <= DENSE_FALLBACK_DIM {
        dense_ground_state(h)
    } else {
        lanczos_krylov(h, max_iter, tol, seed)
    }
}

fn check_input(h: &SparseHermitian, tol: f64) -> Result<()> {
    if h.dimension() < 2 {
        return Err(Error::validation("ground-state solve needs dimension >= 2"));
    }
    if !(tol > 0.0) {
        return Err(Error::validation(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Dense Hermitian eigensolve; returns the lowest eigenpair.
pub fn dense_ground_state(h: &SparseHermitian) -> Result<GroundState> {
    let dense = h.to_dense();
    let eig = SymmetricEigen::new(dense);
    let (imin, &energy) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::numeric("empty spectrum"))?;
    let mut v: Vec<C64> = eig.eigenvectors.column(imin).iter().copied().collect();
    let n = norm(&v);
    v.iter_mut().for_each(|a| *a /= n);
    fix_phase(&mut v);
    let residual = residual_norm(h, &v, energy);
    Ok(GroundState { energy, state: QuantumState::new(v)?, residual, iterations: 0 })
}

fn residual_norm(h: &SparseHermitian, v: &[C64], energy: f64) -> f64 {
    let hv = h.matvec(v);
    hv.iter().zip(v).map(|(a, b)| (a - b * energy).norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Lowest eigenpair of the Lanczos tridiagonal matrix.
fn tridiagonal_lowest(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (imin, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty tridiagonal");
    (theta, eig.eigenvectors.column(imin).iter().copied().collect())
}

/// Pure Krylov-space solve with no dense shortcut.
pub fn lanczos_krylov(h: &SparseHermitian, max_iter: usize, tol: f64, seed: u64) -> Result<GroundState> {
    check_input(h, tol)?;
    let dim = h.dimension();
    let scale = h.norm_bound().max(f64::MIN_POSITIVE);
    let threshold = tol * scale;
    let max_iter = max_iter.clamp(1, dim);

    let mut rng = rng_from_seed(seed);
    let start = QuantumState::random(dim, &mut rng)?.into_amplitudes();

    let mut basis: Vec<Vec<C64>> = vec![start];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); dim];
    let mut last_residual = f64::INFINITY;

    for j in 0..max_iter {
        h.matvec_into(&basis[j], &mut w);
        let alpha = dot(&basis[j], &w).re;
        alphas.push(alpha);
        for (x, v) in w.iter_mut().zip(&basis[j]) {
            *x -= v * alpha;
        }
        if j > 0 {
            let b = betas[j - 1];
            for (x, v) in w.iter_mut().zip(&basis[j - 1]) {
                *x -= v * b;
            }
        }
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                for (x, vi) in w.iter_mut().zip(v) {
                    *x -= vi * c;
                }
            }
        }
        let beta = norm(&w);
        if !beta.is_finite() || !alpha.is_finite() {
            return Err(Error::numeric(format!("non-finite Lanczos coefficient at step {j}")));
        }

        let exhausted = beta <= 1e-13 * scale || j + 1 == max_iter;
        let check = exhausted || j < 12 || j % 6 == 0;
        if check {
            let (_, y) = tridiagonal_lowest(&alphas, &betas);
            let estimate = beta * y.last().copied().unwrap_or(0.0).abs();
            if estimate <= threshold || exhausted {
                let mut x = vec![C64::new(0.0, 0.0); dim];
                for (yi, v) in y.iter().zip(&basis) {
                    for (xk, vk) in x.iter_mut().zip(v) {
                        *xk += vk * *yi;
                    }
                }
                let n = norm(&x);
                x.iter_mut().for_each(|a| *a /= n);
                let energy = h.expectation(&x);
                let residual = residual_norm(h, &x, energy);
                last_residual = residual;
                if residual <= threshold {
                    fix_phase(&mut x);
                    return Ok(GroundState {
                        energy,
                        state: QuantumState::new(x)?,
                        residual,
                        iterations: j + 1,
                    });
                }
                if exhausted {
                    break;
                }
            }
        }
        if beta <= 1e-13 * scale {
            break;
        }
        betas.push(beta);
        let next: Vec<C64> = w.iter().map(|x| x / beta).collect();
        basis.push(next);
    }
    Err(Error::Convergence { iterations: alphas.len(), residual: last_residual })
}
