//! Complex linear algebra shared by the spin and continuous-variable
//! environments: states, sparse Hermitian operators, ground-state solvers and
//! the state functionals used for labels and evaluation.

mod distribution;
mod functionals;
mod lanczos;
mod pauli;
mod sparse;
mod state;

pub use distribution::OutcomeDistribution;
pub use functionals::{
    fidelity, partial_trace, renyi2_entropy, renyi2_mutual_info, DensityMatrix,
};
pub use lanczos::{
    dense_ground_state, ground_state, lanczos_ground_state, lanczos_krylov, GroundState,
    DENSE_FALLBACK_DIM,
};
pub use pauli::{pauli_string_operator, Pauli};
pub use sparse::SparseHermitian;
pub use state::QuantumState;

pub use num_complex::Complex64 as C64;
