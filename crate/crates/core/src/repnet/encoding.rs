use serde::{Deserialize, Serialize};

use crate::cv_env::{HomodyneGrid, FockState};
use crate::error::{Error, Result};
use crate::qcore::{OutcomeDistribution, Pauli, QuantumState};
use crate::spin_env::{full_basis_statistics, pauli_marginal_statistics, PauliMeasurementSpec};

/// Bumped whenever the layout of [`MeasurementEncoding`] vectors changes.
pub const ENCODING_VERSION: u32 = 1;

/// One measurement setting in any environment family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementSpec {
    PauliWindow(PauliMeasurementSpec),
    FullBasis { paulis: Vec<Pauli> },
    Homodyne { theta: f64 },
}

/// Layout of measurement encodings for one environment family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum EncodingScheme {
    /// One-hot window position over `L − 2` slots, then three one-hots over
    /// `{X, Y, Z}`.
    PauliWindow { n_qubits: usize },
    /// One one-hot over `{X, Y, Z}` per qubit.
    FullBasis { n_qubits: usize },
    /// `(cos 2θ, sin 2θ)`.
    Homodyne { n_bins: usize },
}

impl EncodingScheme {
    pub fn measurement_dim(&self) -> usize {
        match *self {
            EncodingScheme::PauliWindow { n_qubits } => n_qubits - 2 + 9,
            EncodingScheme::FullBasis { n_qubits } => 3 * n_qubits,
            EncodingScheme::Homodyne { .. } => 2,
        }
    }

    pub fn outcome_dim(&self) -> usize {
        match *self {
            EncodingScheme::PauliWindow { .. } => 8,
            EncodingScheme::FullBasis { n_qubits } => 1 << n_qubits,
            EncodingScheme::Homodyne { n_bins } => n_bins,
        }
    }

    pub fn encode(&self, spec: &MeasurementSpec) -> Result<MeasurementEncoding> {
        let mut v = vec![0.0; self.measurement_dim()];
        match (*self, spec) {
            (EncodingScheme::PauliWindow { n_qubits }, MeasurementSpec::PauliWindow(s)) => {
                if n_qubits < 3 || s.position > n_qubits - 3 {
                    return Err(Error::validation(format!("window {} outside {n_qubits} qubits", s.label())));
                }
                v[s.position] = 1.0;
                for (k, p) in s.paulis.iter().enumerate() {
                    let idx = p.xyz_index().ok_or_else(|| Error::validation("identity in window measurement"))?;
                    v[n_qubits - 2 + 3 * k + idx] = 1.0;
                }
            }
            (EncodingScheme::FullBasis { n_qubits }, MeasurementSpec::FullBasis { paulis }) => {
                if paulis.len() != n_qubits {
                    return Err(Error::validation(format!("basis of length {} for {n_qubits} qubits", paulis.len())));
                }
                for (q, p) in paulis.iter().enumerate() {
                    let idx = p.xyz_index().ok_or_else(|| Error::validation("identity in product basis"))?;
                    v[3 * q + idx] = 1.0;
                }
            }
            (EncodingScheme::Homodyne { .. }, MeasurementSpec::Homodyne { theta }) => {
                v[0] = (2.0 * theta).cos();
                v[1] = (2.0 * theta).sin();
            }
            _ => return Err(Error::validation(format!("measurement {spec:?} does not fit scheme {self:?}"))),
        }
        Ok(MeasurementEncoding(v))
    }
}

/// Fixed-length real description of a measurement setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasurementEncoding(pub Vec<f64>);

impl MeasurementEncoding {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl MeasurementSpec {
    /// Exact outcome statistics of this measurement on a spin register.
    pub fn spin_statistics(&self, state: &QuantumState) -> Result<OutcomeDistribution> {
        match self {
            MeasurementSpec::PauliWindow(s) => pauli_marginal_statistics(state, s),
            MeasurementSpec::FullBasis { paulis } => full_basis_statistics(state, paulis),
            MeasurementSpec::Homodyne { .. } => Err(Error::validation("homodyne measurement on a spin register")),
        }
    }

    /// Exact binned statistics of a homodyne measurement.
    pub fn homodyne_statistics(&self, grid: &HomodyneGrid, state: &FockState) -> Result<OutcomeDistribution> {
        match self {
            MeasurementSpec::Homodyne { theta } => grid.distribution(state, *theta),
            _ => Err(Error::validation("spin measurement on a bosonic mode")),
        }
    }
}
