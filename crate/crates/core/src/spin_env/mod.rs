//! Spin-chain environments: the bond-alternating XXZ chain on a 21×21
//! parameter grid and the disordered transverse-field Ising chain, together
//! with the Pauli measurements used to probe their ground states.

mod actions;
mod hamiltonian;
mod measurement;

pub use actions::{apply_action_ising, apply_action_xxz, XXZ_MOVES};
pub use hamiltonian::{
    build_ising_hamiltonian, build_xxz_hamiltonian, longitudinal_field, IsingParams, XxzGrid, XxzParams,
    SYMMETRY_BREAKING_FIELD,
};
pub use measurement::{
    all_full_bases, all_window_statistics, full_basis_statistics, pauli_marginal_statistics,
    sample_full_basis_set, sample_pauli_measurement_set, window_statistics, PauliMeasurementSpec,
};

#[cfg(test)]
mod tests;
