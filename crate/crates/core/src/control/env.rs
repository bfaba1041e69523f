use std::collections::HashMap;
use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::config::{CatActionSet, MeasurementPolicy, ProcessActionSet, TaskConfig, TaskKind};
use crate::cv_env::{
    add_measurement_noise, apply_action_cat, apply_action_cat_factored, apply_action_displacement, apply_action_displacement_factored, cat_state,
    displaced_vacuum, kerr_gate, multinomial_sample, sample_quadrature_angles, CatControlParams, DisplacementParams,
    HomodyneGrid, MAX_AMPLITUDE,
};
use crate::error::{Error, Result};
use crate::ppo::ActionStructure;
use crate::qcore::{fidelity, ground_state, OutcomeDistribution, QuantumState};
use crate::repnet::{EncodingScheme, MeasurementEncoding, MeasurementSpec};
use crate::seed::{derive_seed, derive_seed_str, Rng};
use crate::spin_env::{
    apply_action_ising, apply_action_xxz, build_ising_hamiltonian, build_xxz_hamiltonian, longitudinal_field,
    sample_full_basis_set, sample_pauli_measurement_set, IsingParams, XxzGrid, SYMMETRY_BREAKING_FIELD,
};

pub type Pairs = Vec<(MeasurementEncoding, OutcomeDistribution)>;

/// Initial and target parameters of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStart {
    pub initial: Vec<f64>,
    pub target: Vec<f64>,
}

/// A controllable quantum system probed by a measurement set.
///
/// `step` is deterministic given the parameters and the action; all
/// randomness (measurement sets, noise) comes in through explicit seeds.
pub trait Environment {
    fn task(&self) -> TaskKind;
    fn action_structure(&self) -> ActionStructure;
    fn max_steps(&self) -> usize;
    fn is_noiseless(&self) -> bool;
    fn measurement_policy(&self) -> MeasurementPolicy;
    /// Draws from the training distribution of (initial, target) pairs.
    fn sample_start(&self, rng: &mut Rng) -> EpisodeStart;
    /// Sets the parameters; draws a fresh measurement set unless it is run-wide.
    fn reset(&mut self, start: &EpisodeStart, seed: u64) -> Result<()>;
    fn resample_measurements(&mut self, seed: u64) -> Result<()>;
    fn params(&self) -> Vec<f64>;
    fn target_params(&self) -> Vec<f64>;
    fn current_state(&mut self) -> Result<QuantumState>;
    fn target_state(&mut self) -> Result<QuantumState>;
    /// Statistics of the current state, with the configured noise.
    fn measure(&mut self, seed: u64) -> Result<Pairs>;
    /// Noiseless statistics of the target state on the same measurement set.
    fn measure_target(&mut self) -> Result<Pairs>;
    fn step(&mut self, action: &[usize]) -> Result<()>;

    /// Ground-truth fidelity with the target; never shown to the agent.
    fn fidelity(&mut self) -> Result<f64> {
        let a = self.current_state()?;
        let b = self.target_state()?;
        fidelity(&a, &b)
    }
}

const ISING_CACHE_CAP: usize = 50_000;

enum System {
    Xxz { grid: XxzGrid, cache: HashMap<usize, QuantumState> },
    Ising { cache: HashMap<Vec<i64>, QuantumState> },
    Cat { grid: HomodyneGrid },
    Process { grid: HomodyneGrid },
}

/// The four tasks behind [`Environment`].
pub struct ControlEnv {
    cfg: TaskConfig,
    scheme: EncodingScheme,
    system: System,
    params: Vec<f64>,
    target: Vec<f64>,
    specs: Vec<MeasurementSpec>,
    encodings: Vec<MeasurementEncoding>,
    /// Actions applied since the last reset.
    steps_taken: usize,
}

pub fn make_environment(cfg: &TaskConfig) -> Result<ControlEnv> {
    ControlEnv::new(cfg.clone())
}

fn key(couplings: &[f64]) -> Vec<i64> {
    couplings.iter().map(|j| (j * 1e9).round() as i64).collect()
}

fn xxz_ground_state(grid: &XxzGrid, node: usize, chain_length: usize) -> Result<QuantumState> {
    let p = grid.params(node / grid.nodes, node % grid.nodes, chain_length);
    let h = build_xxz_hamiltonian(&p)?.with_diagonal(&longitudinal_field(chain_length, SYMMETRY_BREAKING_FIELD))?;
    Ok(ground_state(&h, 0)?.state)
}

fn ising_ground_state(couplings: &[f64]) -> Result<QuantumState> {
    let h = build_ising_hamiltonian(&IsingParams { couplings: couplings.to_vec() })?;
    Ok(ground_state(&h, 0)?.state)
}

impl ControlEnv {
    pub fn new(cfg: TaskConfig) -> Result<Self> {
        cfg.validate()?;
        let system = match cfg.task {
            TaskKind::Xxz => System::Xxz { grid: XxzGrid::default(), cache: HashMap::new() },
            TaskKind::Ising => System::Ising { cache: HashMap::new() },
            TaskKind::Cat => System::Cat { grid: HomodyneGrid::new(cfg.n_bins, (-4.0, 4.0), cfg.cutoff)? },
            TaskKind::ProcessOutput => System::Process { grid: HomodyneGrid::new(cfg.n_bins, (-4.0, 4.0), cfg.cutoff)? },
        };
        let n = cfg.n_params();
        let scheme = cfg.encoding_scheme();
        let mut env = Self { cfg, scheme, system, params: vec![0.0; n], target: vec![0.0; n], specs: Vec::new(), encodings: Vec::new(), steps_taken: 0 };
        env.resample_measurements(derive_seed_str(env.cfg.measurement_seed, "measurements"))?;
        Ok(env)
    }

    pub fn config(&self) -> &TaskConfig {
        &self.cfg
    }

    pub fn measurement_specs(&self) -> &[MeasurementSpec] {
        &self.specs
    }

    /// Brings raw parameters onto the task's admissible set.
    pub fn normalize_params(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.cfg.n_params() {
            return Err(Error::validation(format!("{} parameters expected, got {}", self.cfg.n_params(), p.len())));
        }
        Ok(match &self.system {
            System::Xxz { grid, .. } => {
                let (i, k) = grid.snap(p[0], p[1]);
                vec![grid.j_value(i), grid.delta_value(k)]
            }
            System::Ising { .. } => p.iter().map(|j| j.clamp(-1.0, 1.0)).collect(),
            System::Cat { .. } => {
                let a = CatControlParams::new(C64::new(p[0], p[1])).alpha;
                vec![a.re, a.im]
            }
            System::Process { .. } => {
                let d = DisplacementParams::new(p[0], p[1]);
                vec![d.magnitude, d.phase]
            }
        })
    }

    /// State of the controlled system at parameters `p` (normalized first).
    pub fn state_for(&mut self, p: &[f64]) -> Result<QuantumState> {
        let p = self.normalize_params(p)?;
        self.state_of(&p)
    }

    /// Exact statistics of `specs` on `state`.
    pub fn statistics_on(&self, state: &QuantumState, specs: &[MeasurementSpec]) -> Result<Vec<OutcomeDistribution>> {
        match &self.system {
            System::Xxz { .. } | System::Ising { .. } => specs.iter().map(|s| s.spin_statistics(state)).collect(),
            System::Cat { grid } | System::Process { grid } => specs.iter().map(|s| s.homodyne_statistics(grid, state)).collect(),
        }
    }

    fn state_of(&mut self, p: &[f64]) -> Result<QuantumState> {
        let l = self.cfg.n_qubits;
        let cutoff = self.cfg.cutoff;
        match &mut self.system {
            System::Xxz { grid, cache } => {
                let (i, k) = grid.snap(p[0], p[1]);
                let node = grid.node_index(i, k);
                if let Some(s) = cache.get(&node) {
                    return Ok(s.clone());
                }
                let s = xxz_ground_state(grid, node, l)?;
                cache.insert(node, s.clone());
                Ok(s)
            }
            System::Ising { cache } => {
                let k = key(p);
                if let Some(s) = cache.get(&k) {
                    return Ok(s.clone());
                }
                let s = ising_ground_state(p)?;
                if cache.len() < ISING_CACHE_CAP {
                    cache.insert(k, s.clone());
                }
                Ok(s)
            }
            System::Cat { .. } => cat_state(C64::new(p[0], p[1]), cutoff),
            System::Process { .. } => Ok(kerr_gate(&displaced_vacuum(&DisplacementParams::new(p[0], p[1]), cutoff)?)),
        }
    }

    fn statistics(&mut self, p: &[f64]) -> Result<Vec<OutcomeDistribution>> {
        let state = self.state_of(p)?;
        self.statistics_on(&state, &self.specs)
    }

    fn pairs(&self, dists: Vec<OutcomeDistribution>) -> Pairs {
        self.encodings.iter().cloned().zip(dists).collect()
    }

    fn beta(&self) -> f64 {
        // Linear decay within the episode: β at action k (1-based) is
        // β₀(1 − (k − 1)/T).
        let t = self.cfg.max_steps as f64;
        self.cfg.action_step * (1.0 - self.steps_taken as f64 / t)
    }
}

impl Environment for ControlEnv {
    fn task(&self) -> TaskKind {
        self.cfg.task
    }

    fn action_structure(&self) -> ActionStructure {
        match self.cfg.task {
            TaskKind::Xxz => ActionStructure::Discrete(8),
            TaskKind::Ising => ActionStructure::MultiDiscrete(vec![3; self.cfg.n_params()]),
            TaskKind::Cat => match self.cfg.cat_actions {
                CatActionSet::Eight => ActionStructure::Discrete(8),
                CatActionSet::Factored => ActionStructure::MultiDiscrete(vec![3, 3]),
            },
            TaskKind::ProcessOutput => match self.cfg.process_actions {
                ProcessActionSet::Four => ActionStructure::Discrete(4),
                ProcessActionSet::Factored => ActionStructure::MultiDiscrete(vec![3, 3]),
            },
        }
    }

    fn max_steps(&self) -> usize {
        self.cfg.max_steps
    }

    fn is_noiseless(&self) -> bool {
        self.cfg.is_noiseless()
    }

    fn measurement_policy(&self) -> MeasurementPolicy {
        self.cfg.measurement_policy
    }

    fn sample_start(&self, rng: &mut Rng) -> EpisodeStart {
        let draw = |rng: &mut Rng| -> Vec<f64> {
            match &self.system {
                System::Xxz { grid, .. } => {
                    let i = rng.random_range(0..grid.nodes);
                    let k = rng.random_range(0..grid.nodes);
                    vec![grid.j_value(i), grid.delta_value(k)]
                }
                System::Ising { .. } => {
                    // Couplings on the action lattice inside (−1, 1).
                    let step = self.cfg.action_step;
                    let m = ((1.0 - 1e-9) / step).floor() as i64;
                    (0..self.cfg.n_params()).map(|_| rng.random_range(-m..=m) as f64 * step).collect()
                }
                System::Cat { .. } => {
                    let r = 2.5 * rng.random::<f64>().sqrt();
                    let phi = rng.random_range(0.0..TAU);
                    vec![r * phi.cos(), r * phi.sin()]
                }
                System::Process { .. } => vec![rng.random_range(0.0..MAX_AMPLITUDE), rng.random_range(0.0..TAU)],
            }
        };
        let target = match &self.cfg.target {
            Some(t) => self.normalize_params(t).expect("validated target"),
            None => draw(rng),
        };
        let initial = match &self.cfg.initial {
            Some(p) => self.normalize_params(p).expect("validated initial"),
            None => loop {
                let p = draw(rng);
                // Grid tasks never start in the target cell.
                let discrete = matches!(self.cfg.task, TaskKind::Xxz | TaskKind::Ising);
                if !discrete || p.iter().zip(&target).any(|(a, b)| (a - b).abs() > 1e-9) {
                    break p;
                }
            },
        };
        EpisodeStart { initial, target }
    }

    fn reset(&mut self, start: &EpisodeStart, seed: u64) -> Result<()> {
        self.params = self.normalize_params(&start.initial)?;
        self.target = self.normalize_params(&start.target)?;
        self.steps_taken = 0;
        match self.cfg.measurement_policy {
            MeasurementPolicy::PerRun => Ok(()),
            MeasurementPolicy::PerEpisode | MeasurementPolicy::PerStep => self.resample_measurements(seed),
        }
    }

    fn resample_measurements(&mut self, seed: u64) -> Result<()> {
        let n = self.cfg.n_measurements;
        self.specs = match self.cfg.task {
            TaskKind::Xxz => sample_pauli_measurement_set(self.cfg.n_qubits, n, seed)?.into_iter().map(MeasurementSpec::PauliWindow).collect(),
            TaskKind::Ising => sample_full_basis_set(self.cfg.n_qubits, n, seed)?
                .into_iter()
                .map(|paulis| MeasurementSpec::FullBasis { paulis })
                .collect(),
            TaskKind::Cat | TaskKind::ProcessOutput => {
                sample_quadrature_angles(n, seed).into_iter().map(|theta| MeasurementSpec::Homodyne { theta }).collect()
            }
        };
        self.encodings = self.specs.iter().map(|s| self.scheme.encode(s)).collect::<Result<_>>()?;
        Ok(())
    }

    fn params(&self) -> Vec<f64> {
        self.params.clone()
    }

    fn target_params(&self) -> Vec<f64> {
        self.target.clone()
    }

    fn current_state(&mut self) -> Result<QuantumState> {
        let p = self.params.clone();
        self.state_of(&p)
    }

    fn target_state(&mut self) -> Result<QuantumState> {
        let p = self.target.clone();
        self.state_of(&p)
    }

    fn measure(&mut self, seed: u64) -> Result<Pairs> {
        let p = self.params.clone();
        let mut dists = self.statistics(&p)?;
        if !self.cfg.is_noiseless() {
            for (i, d) in dists.iter_mut().enumerate() {
                let s = derive_seed(seed, i as u64);
                if self.cfg.shots > 0 {
                    *d = multinomial_sample(d, self.cfg.shots, derive_seed(s, 1))?;
                }
                if self.cfg.noise_sigma2 > 0.0 {
                    *d = add_measurement_noise(d, self.cfg.noise_sigma2, derive_seed(s, 2))?;
                }
            }
        }
        Ok(self.pairs(dists))
    }

    fn measure_target(&mut self) -> Result<Pairs> {
        let p = self.target.clone();
        let dists = self.statistics(&p)?;
        Ok(self.pairs(dists))
    }

    fn step(&mut self, action: &[usize]) -> Result<()> {
        let structure = self.action_structure();
        let sizes = structure.factors();
        if action.len() != sizes.len() || action.iter().zip(&sizes).any(|(a, n)| a >= n) {
            return Err(Error::validation(format!("action {action:?} does not fit {structure:?}")));
        }
        let beta = self.beta();
        self.params = match &self.system {
            System::Xxz { grid, .. } => {
                let (i, k) = grid.snap(self.params[0], self.params[1]);
                let p = grid.params(i, k, self.cfg.n_qubits);
                let q = apply_action_xxz(&p, action[0], grid)?;
                vec![q.j_ratio, q.delta]
            }
            System::Ising { .. } => {
                // Factor indices 0, 1, 2 mean −step, 0, +step.
                let moves: Vec<i32> = action.iter().map(|&a| a as i32 - 1).collect();
                apply_action_ising(&IsingParams { couplings: self.params.clone() }, &moves, self.cfg.action_step)?.couplings
            }
            System::Cat { .. } => {
                let p = CatControlParams::new(C64::new(self.params[0], self.params[1]));
                let q = match self.cfg.cat_actions {
                    CatActionSet::Eight => apply_action_cat(&p, action[0], beta)?,
                    CatActionSet::Factored => apply_action_cat_factored(&p, [action[0], action[1]], beta)?,
                };
                vec![q.alpha.re, q.alpha.im]
            }
            System::Process { .. } => {
                let p = DisplacementParams::new(self.params[0], self.params[1]);
                let q = match self.cfg.process_actions {
                    ProcessActionSet::Four => apply_action_displacement(&p, action[0])?,
                    ProcessActionSet::Factored => apply_action_displacement_factored(&p, [action[0], action[1]])?,
                };
                vec![q.magnitude, q.phase]
            }
        };
        self.steps_taken += 1;
        Ok(())
    }
}
