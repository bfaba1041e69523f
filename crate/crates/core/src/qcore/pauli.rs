use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::sparse::SparseHermitian;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const XYZ: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// Index within `{X, Y, Z}`; `None` for the identity.
    pub fn xyz_index(self) -> Option<usize> {
        match self {
            Pauli::I => None,
            Pauli::X => Some(0),
            Pauli::Y => Some(1),
            Pauli::Z => Some(2),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// `(output bit flip, amplitude)` of `P|bit⟩`.
    fn action(self, bit: usize) -> (bool, C64) {
        match (self, bit) {
            (Pauli::I, _) => (false, C64::new(1.0, 0.0)),
            (Pauli::X, _) => (true, C64::new(1.0, 0.0)),
            (Pauli::Y, 0) => (true, C64::new(0.0, 1.0)),
            (Pauli::Y, _) => (true, C64::new(0.0, -1.0)),
            (Pauli::Z, 0) => (false, C64::new(1.0, 0.0)),
            (Pauli::Z, _) => (false, C64::new(-1.0, 0.0)),
        }
    }
}

/// Tensor product placing `paulis[k]` on qubit `positions[k]` and identities
/// elsewhere. Qubit 0 is the most significant bit of the basis index.
pub fn pauli_string_operator(paulis: &[Pauli], positions: &[usize], n_qubits: usize) -> Result<SparseHermitian> {
    if paulis.len() != positions.len() {
        return Err(Error::validation("paulis and positions differ in length"));
    }
    if n_qubits == 0 || n_qubits > 24 {
        return Err(Error::validation(format!("unsupported qubit count {n_qubits}")));
    }
    for (k, &p) in positions.iter().enumerate() {
        if p >= n_qubits {
            return Err(Error::validation(format!("position {p} out of range for {n_qubits} qubits")));
        }
        if positions[..k].contains(&p) {
            return Err(Error::validation(format!("position {p} repeated")));
        }
    }
    let dim = 1usize << n_qubits;
    let entries = (0..dim).map(|col| {
        let mut row = col;
        let mut amp = C64::new(1.0, 0.0);
        for (&p, &q) in paulis.iter().zip(positions) {
            let shift = n_qubits - 1 - q;
            let bit = (col >> shift) & 1;
            let (flip, a) = p.action(bit);
            if flip {
                row ^= 1 << shift;
            }
            amp *= a;
        }
        (row, col, amp)
    });
    SparseHermitian::from_entries(dim, entries)
}
