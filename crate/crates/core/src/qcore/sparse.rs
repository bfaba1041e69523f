use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Hermiticity tolerance for stored entries.
const HERMITIAN_TOL: f64 = 1e-12;

/// A sparse Hermitian operator stored in compressed-row form.
///
/// Duplicate `(row, col)` entries are summed on construction and exact zeros
/// dropped, so two operators built from the same terms in any order compare
/// equal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseHermitian {
    /// Builds from `(row, col, value)` triplets and checks Hermiticity.
    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, usize, C64)>) -> Result<Self> {
        let mut acc: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (r, c, v) in entries {
            if r >= dim || c >= dim {
                return Err(Error::validation(format!("entry ({r}, {c}) outside dimension {dim}")));
            }
            *acc.entry((r, c)).or_insert(C64::new(0.0, 0.0)) += v;
        }
        acc.retain(|_, v| *v != C64::new(0.0, 0.0));
        for (&(r, c), v) in &acc {
            let t = acc.get(&(c, r)).copied().unwrap_or(C64::new(0.0, 0.0));
            if (t - v.conj()).norm() > HERMITIAN_TOL {
                return Err(Error::validation(format!(
                    "not Hermitian: H[{r},{c}] = {v} but H[{c},{r}] = {t}"
                )));
            }
        }
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(acc.len());
        let mut vals = Vec::with_capacity(acc.len());
        for (&(r, c), &v) in &acc {
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { dim, row_ptr, cols, vals })
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_entries(dim, (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))))
            .expect("identity is Hermitian")
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    /// `out = H · x`.
    pub fn matvec_into(&self, x: &[C64], out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        self.matvec_into(x, &mut out);
        out
    }

    /// Maximum absolute row sum; an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.vals[k].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `⟨x|H|x⟩` (real for Hermitian H).
    pub fn expectation(&self, x: &[C64]) -> f64 {
        let hx = self.matvec(x);
        x.iter().zip(&hx).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, C64::new(0.0, 0.0));
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    /// `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::validation("dimension mismatch in operator sum"));
        }
        Self::from_entries(self.dim, self.entries().chain(other.entries()))
    }

    /// `s · self` for real `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= s;
        }
        out
    }

    /// Adds a real diagonal.
    pub fn with_diagonal(&self, diag: &[f64]) -> Result<Self> {
        if diag.len() != self.dim {
            return Err(Error::validation("diagonal length mismatch"));
        }
        Self::from_entries(
            self.dim,
            self.entries()
                .chain(diag.iter().enumerate().map(|(i, &d)| (i, i, C64::new(d, 0.0)))),
        )
    }
}
