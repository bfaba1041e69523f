//! Single bosonic mode in a truncated Fock basis: coherent and cat states,
//! the Kerr Hamiltonian and gate, binned homodyne statistics, measurement
//! noise, control actions and the Wigner function.

mod actions;
mod fock;
mod homodyne;
mod noise;
mod wigner;

pub use actions::{
    apply_action_cat, apply_action_cat_factored, apply_action_displacement, apply_action_displacement_factored, CatControlParams, DisplacementParams,
    CAT_MOVES, DISPLACEMENT_MAGNITUDE_STEP, DISPLACEMENT_PHASE_STEP, MAX_AMPLITUDE,
};
pub use fock::{
    cat_state, coherent_state, displaced_vacuum, kerr_gate, kerr_hamiltonian, mean_photon_number, min_cutoff,
    tail_mass, FockState, DEFAULT_CUTOFF, TAIL_LEVELS, TAIL_TOL,
};
pub use homodyne::{homodyne_distribution, sample_quadrature_angles, HomodyneGrid, HomodyneSpec};
pub use noise::{add_measurement_noise, multinomial_sample};
pub use wigner::{wigner_function, WignerGrid};
