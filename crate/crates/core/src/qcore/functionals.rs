use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::state::QuantumState;
use crate::error::{Error, Result};

const DM_TOL: f64 = 1e-10;

/// `|⟨a|b⟩|²`, clamped into `[0, 1]`.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and (for dimensions up to 256) the spectrum.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::validation("density matrix must be square and nonempty"));
        }
        for i in 0..n {
            for j in 0..n {
                if (matrix[(i, j)] - matrix[(j, i)].conj()).norm() > DM_TOL {
                    return Err(Error::validation("density matrix is not Hermitian"));
                }
            }
        }
        let tr: f64 = (0..n).map(|i| matrix[(i, i)].re).sum();
        if (tr - 1.0).abs() > DM_TOL {
            return Err(Error::validation(format!("density matrix trace {tr}")));
        }
        if n <= 256 {
            let eig = SymmetricEigen::new(matrix.clone());
            if let Some(min) = eig.eigenvalues.iter().copied().reduce(f64::min) {
                if min < -1e-9 {
                    return Err(Error::validation(format!("negative eigenvalue {min}")));
                }
            }
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(state: &QuantumState) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        Self { matrix: &v * v.adjoint() }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dimension()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }
}

fn validate_subsystems(indices: &[usize], n_sub: usize, what: &str) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::validation(format!("{what}: empty subsystem set")));
    }
    let mut seen = vec![false; n_sub];
    for &i in indices {
        if i >= n_sub {
            return Err(Error::validation(format!("{what}: subsystem {i} out of range")));
        }
        if seen[i] {
            return Err(Error::validation(format!("{what}: subsystem {i} repeated")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Reduced density matrix on `keep`. Subsystem 0 is the most significant
/// digit of the basis index; the kept subsystems are ordered as in `keep`.
pub fn partial_trace(state: &QuantumState, keep: &[usize], local_dims: &[usize]) -> Result<DensityMatrix> {
    validate_subsystems(keep, local_dims.len(), "partial_trace")?;
    let total: usize = local_dims.iter().product();
    if total != state.basis_size() {
        return Err(Error::validation(format!(
            "local dimensions multiply to {total}, state has {}",
            state.basis_size()
        )));
    }
    let n_sub = local_dims.len();
    let mut strides = vec![1usize; n_sub];
    for k in (0..n_sub.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * local_dims[k + 1];
    }
    let traced: Vec<usize> = (0..n_sub).filter(|k| !keep.contains(k)).collect();
    let dk: usize = keep.iter().map(|&k| local_dims[k]).product();
    let dt: usize = traced.iter().map(|&k| local_dims[k]).product();

    // psi[ki * dt + ti]
    let mut psi = vec![C64::new(0.0, 0.0); dk * dt];
    for (b, &amp) in state.amplitudes().iter().enumerate() {
        let digit = |k: usize| (b / strides[k]) % local_dims[k];
        let ki = keep.iter().fold(0, |acc, &k| acc * local_dims[k] + digit(k));
        let ti = traced.iter().fold(0, |acc, &k| acc * local_dims[k] + digit(k));
        psi[ki * dt + ti] = amp;
    }
    let mut rho = DMatrix::from_element(dk, dk, C64::new(0.0, 0.0));
    for i in 0..dk {
        let ri = &psi[i * dt..(i + 1) * dt];
        for j in i..dk {
            let rj = &psi[j * dt..(j + 1) * dt];
            let v: C64 = ri.iter().zip(rj).map(|(a, b)| a * b.conj()).sum();
            rho[(i, j)] = v;
            rho[(j, i)] = v.conj();
        }
        rho[(i, i)].im = 0.0;
    }
    Ok(DensityMatrix { matrix: rho })
}

/// `S₂(ρ) = −log₂ Tr ρ²` in bits.
pub fn renyi2_entropy(rho: &DensityMatrix) -> f64 {
    -rho.purity().log2()
}

/// `S₂(A) + S₂(B) − S₂(A∪B)` in bits.
pub fn renyi2_mutual_info(state: &QuantumState, a: &[usize], b: &[usize], local_dims: &[usize]) -> Result<f64> {
    validate_subsystems(a, local_dims.len(), "renyi2_mutual_info A")?;
    validate_subsystems(b, local_dims.len(), "renyi2_mutual_info B")?;
    if a.iter().any(|i| b.contains(i)) {
        return Err(Error::validation("subsystems A and B overlap"));
    }
    let mut ab: Vec<usize> = a.iter().chain(b).copied().collect();
    ab.sort_unstable();
    let sa = renyi2_entropy(&partial_trace(state, a, local_dims)?);
    let sb = renyi2_entropy(&partial_trace(state, b, local_dims)?);
    let sab = if ab.len() == local_dims.len() {
        0.0_f64.max(renyi2_entropy(&DensityMatrix::pure(state)))
    } else {
        renyi2_entropy(&partial_trace(state, &ab, local_dims)?)
    };
    Ok(sa + sb - sab)
}
