//! Representation-guided reinforcement learning for quantum state control.
//!
//! The crate simulates two families of quantum systems (spin-chain ground
//! states and a single bosonic mode), produces measurement statistics for
//! them, learns state representations from those statistics with a small
//! neural encoder, and trains a PPO-Clip agent whose only reward is the
//! distance between the current and target representations.
//!
//! Module map:
//! - [`qcore`]: states, sparse Hermitian operators, ground states, fidelity and Rényi-2 quantities.
//! - [`spin_env`]: bond-alternating XXZ and disordered Ising chains with Pauli measurements.
//! - [`cv_env`]: truncated Fock space, cat/coherent states, Kerr gate, binned homodyne statistics.
//! - [`neural`]: multilayer perceptrons with explicit backpropagation and Adam.
//! - [`repnet`]: the representation network (encoder, generator, property predictor).
//! - [`ppo`]: PPO-Clip actor-critic.
//! - [`control`]: environments, reward, episodes, training and evaluation.
//! - [`io`]: configuration, dataset/weight files, manifests and CSV export.

pub mod control;
pub mod cv_env;
pub mod error;
pub mod io;
pub mod neural;
pub mod ppo;
pub mod qcore;
pub mod repnet;
pub mod seed;
pub mod spin_env;

pub use error::{Error, Result};
pub use qcore::{OutcomeDistribution, QuantumState, SparseHermitian, C64};
pub use repnet::{MeasurementEncoding, RepNet, RepNetMode, Representation};
