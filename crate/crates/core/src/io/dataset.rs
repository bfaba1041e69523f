use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::files::{check_version, FORMAT_VERSION};
use crate::control::{make_environment, TaskConfig, TaskKind};
use crate::cv_env::{sample_quadrature_angles, MAX_AMPLITUDE};
use crate::error::{Error, Result};
use crate::qcore::{renyi2_mutual_info, OutcomeDistribution};
use crate::repnet::{EncodingScheme, MeasurementSpec, TrainingRecord};
use crate::seed::{derive_seed, derive_seed_str, rng_from_seed};
use crate::spin_env::{all_full_bases, PauliMeasurementSpec, XxzGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetOptions {
    /// Number of states; the XXZ dataset always covers the whole grid.
    pub n_states: usize,
    /// Measurements per state; 0 takes every available setting (spin tasks).
    pub measurements_per_state: usize,
    /// Attach Rényi-2 mutual information between the end qubits.
    pub labels: bool,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        Self { n_states: 600, measurements_per_state: 24, labels: true }
    }
}

impl DatasetOptions {
    pub fn defaults(task: TaskKind) -> Self {
        match task {
            TaskKind::Xxz => Self { n_states: 441, measurements_per_state: 0, labels: true },
            TaskKind::Ising => Self { n_states: 400, measurements_per_state: 40, labels: true },
            TaskKind::Cat | TaskKind::ProcessOutput => Self { n_states: 600, measurements_per_state: 24, labels: false },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    /// Task parameters of the state.
    pub params: Vec<f64>,
    pub measurements: Vec<(MeasurementSpec, OutcomeDistribution)>,
    pub label: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub format_version: String,
    pub task: TaskConfig,
    pub options: DatasetOptions,
    pub seed: u64,
    pub records: Vec<DatasetRecord>,
}

impl Dataset {
    pub fn validate(&self) -> Result<()> {
        check_version(&self.format_version, "dataset")?;
        if self.records.is_empty() {
            return Err(Error::Format("dataset has no records".into()));
        }
        Ok(())
    }

    pub fn scheme(&self) -> EncodingScheme {
        self.task.encoding_scheme()
    }

    /// Encoded pairs for repnet training.
    pub fn training_records(&self) -> Result<Vec<TrainingRecord>> {
        let scheme = self.scheme();
        self.records
            .iter()
            .map(|r| {
                let pairs = r.measurements.iter().map(|(s, d)| Ok((scheme.encode(s)?, d.clone()))).collect::<Result<_>>()?;
                Ok(TrainingRecord { pairs, label: r.label })
            })
            .collect()
    }
}

/// Parameter sweep over the task's state family with exact statistics.
pub fn generate_dataset(task: &TaskConfig, options: &DatasetOptions, seed: u64) -> Result<Dataset> {
    task.validate()?;
    let mut env = make_environment(task)?;
    let mut rng = rng_from_seed(derive_seed_str(seed, "params"));
    let params: Vec<Vec<f64>> = match task.task {
        TaskKind::Xxz => {
            let g = XxzGrid::default();
            g.nodes().map(|(i, k)| vec![g.j_value(i), g.delta_value(k)]).collect()
        }
        TaskKind::Ising => {
            let n = task.n_params();
            let step = task.action_step;
            let m = ((1.0 - 1e-9) / step).floor() as i64;
            let mut v = vec![vec![0.0; n]];
            while v.len() < options.n_states.max(1) {
                v.push((0..n).map(|_| rng.random_range(-m..=m) as f64 * step).collect());
            }
            v
        }
        TaskKind::Cat => (0..options.n_states)
            .map(|_| {
                let r = MAX_AMPLITUDE * rng.random::<f64>().sqrt();
                let phi = rng.random_range(0.0..TAU);
                vec![r * phi.cos(), r * phi.sin()]
            })
            .collect(),
        TaskKind::ProcessOutput => {
            (0..options.n_states).map(|_| vec![MAX_AMPLITUDE * rng.random::<f64>().sqrt(), rng.random_range(0.0..TAU)]).collect()
        }
    };
    let mut records = Vec::with_capacity(params.len());
    for (idx, p) in params.into_iter().enumerate() {
        let s = derive_seed(seed, idx as u64);
        let specs = measurement_choice(task, options, s)?;
        let state = env.state_for(&p)?;
        let dists = env.statistics_on(&state, &specs)?;
        let label = if options.labels && matches!(task.task, TaskKind::Xxz | TaskKind::Ising) {
            let l = task.n_qubits;
            Some(renyi2_mutual_info(&state, &[0], &[l - 1], &vec![2; l])?)
        } else {
            None
        };
        records.push(DatasetRecord { params: env.normalize_params(&p)?, measurements: specs.into_iter().zip(dists).collect(), label });
    }
    Ok(Dataset { format_version: FORMAT_VERSION.into(), task: task.clone(), options: *options, seed, records })
}

fn measurement_choice(task: &TaskConfig, options: &DatasetOptions, seed: u64) -> Result<Vec<MeasurementSpec>> {
    let k = options.measurements_per_state;
    Ok(match task.task {
        TaskKind::Xxz => {
            let n = 27 * (task.n_qubits - 2);
            let mut all: Vec<_> = (0..n).map(PauliMeasurementSpec::from_index).collect();
            if k > 0 && k < n {
                all.shuffle(&mut rng_from_seed(seed));
                all.truncate(k);
                all.sort();
            }
            all.into_iter().map(MeasurementSpec::PauliWindow).collect()
        }
        TaskKind::Ising => {
            let mut all = all_full_bases(task.n_qubits);
            if k > 0 && k < all.len() {
                all.shuffle(&mut rng_from_seed(seed));
                all.truncate(k);
            }
            all.into_iter().map(|paulis| MeasurementSpec::FullBasis { paulis }).collect()
        }
        TaskKind::Cat | TaskKind::ProcessOutput => {
            if k == 0 {
                return Err(Error::validation("homodyne datasets need a positive measurements_per_state"));
            }
            sample_quadrature_angles(k, seed).into_iter().map(|theta| MeasurementSpec::Homodyne { theta }).collect()
        }
    })
}
