use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repnet::EncodingScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Xxz,
    Ising,
    Cat,
    ProcessOutput,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Xxz => "xxz",
            TaskKind::Ising => "ising",
            TaskKind::Cat => "cat",
            TaskKind::ProcessOutput => "process_output",
        }
    }

    /// Names of the entries of a parameter vector.
    pub fn param_names(self, n_params: usize) -> Vec<String> {
        match self {
            TaskKind::Xxz => vec!["j_ratio".into(), "delta".into()],
            TaskKind::Ising => (0..n_params).map(|i| format!("j{i}")).collect(),
            TaskKind::Cat => vec!["alpha_re".into(), "alpha_im".into()],
            TaskKind::ProcessOutput => vec!["magnitude".into(), "phase".into()],
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xxz" => Ok(TaskKind::Xxz),
            "ising" => Ok(TaskKind::Ising),
            "cat" => Ok(TaskKind::Cat),
            "process_output" | "process-output" => Ok(TaskKind::ProcessOutput),
            _ => Err(Error::validation(format!("unknown task {s:?}"))),
        }
    }
}

/// When the random measurement set is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementPolicy {
    /// Once per run from `measurement_seed`, shared by every episode.
    PerRun,
    /// Once per episode, reused at every step.
    PerEpisode,
    /// Afresh at every control step.
    PerStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatActionSet {
    /// The eight moves `α ± β`, `α ± iβ`, `α ± β ± iβ`.
    Eight,
    /// Independent `{−β, 0, +β}` choices on `Re α` and `Im α`.
    Factored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessActionSet {
    /// The four moves `(|α| ± 0.09, arg α ± 0.06π)`.
    Four,
    /// Independent `{−, 0, +}` choices on `|α|` and `arg α`.
    Factored,
}

/// Everything that defines one control task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaskConfig {
    #[serde(rename = "kind")]
    pub task: TaskKind,
    /// Chain length (spin tasks only).
    pub n_qubits: usize,
    pub n_measurements: usize,
    pub measurement_policy: MeasurementPolicy,
    /// Seed of the run-wide measurement set.
    pub measurement_seed: u64,
    /// Variance of the additive Gaussian noise on each frequency; 0 disables.
    pub noise_sigma2: f64,
    /// Finite-shot sampling before any Gaussian noise; 0 means exact.
    pub shots: u64,
    pub max_steps: usize,
    pub reward_scale: f64,
    /// Episodes end once the representation distance falls to this value
    /// (the reward then is `−terminate_fraction · C/√d` or better).
    pub terminate_fraction: f64,
    /// Ising coupling step, or the initial cat step β.
    pub action_step: f64,
    pub cat_actions: CatActionSet,
    pub process_actions: ProcessActionSet,
    pub cutoff: usize,
    pub n_bins: usize,
    /// Fixed target parameters; `None` (stored as `[]`) draws one per episode.
    #[serde(with = "empty_is_none")]
    pub target: Option<Vec<f64>>,
    /// Fixed initial parameters; `None` draws from the training distribution.
    #[serde(with = "empty_is_none")]
    pub initial: Option<Vec<f64>>,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self::defaults(TaskKind::Cat)
    }
}

impl TaskConfig {
    pub fn defaults(task: TaskKind) -> Self {
        let base = Self {
            task,
            n_qubits: 0,
            n_measurements: 3,
            measurement_policy: MeasurementPolicy::PerRun,
            measurement_seed: 0,
            noise_sigma2: 0.0,
            shots: 0,
            max_steps: 20,
            reward_scale: 10.0,
            terminate_fraction: 0.05,
            action_step: 0.0,
            cat_actions: CatActionSet::Eight,
            process_actions: ProcessActionSet::Four,
            cutoff: 60,
            n_bins: 100,
            target: None,
            initial: None,
        };
        match task {
            TaskKind::Xxz => Self { n_qubits: 8, n_measurements: 50, max_steps: 30, target: Some(super::XXZ_TP.to_vec()), ..base },
            TaskKind::Ising => Self {
                n_qubits: 6,
                n_measurements: 5,
                max_steps: 50,
                action_step: 0.1,
                // Ising ground states in the paramagnetic window sit close
                // together in representation space; a distance cut would end
                // most episodes before the first action.
                terminate_fraction: 0.0,
                target: Some(vec![0.8; 5]),
                ..base
            },
            TaskKind::Cat => Self { action_step: 0.3, target: Some(super::CAT_TARGET.to_vec()), ..base },
            TaskKind::ProcessOutput => Self { max_steps: 55, ..base },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::validation(m));
        if self.max_steps == 0 || self.n_measurements == 0 {
            return bad("max_steps and n_measurements must be positive".into());
        }
        if !(self.reward_scale > 0.0) || !(self.terminate_fraction >= 0.0) || !(self.noise_sigma2 >= 0.0) {
            return bad("reward_scale must be positive; terminate_fraction and noise_sigma2 nonnegative".into());
        }
        let n_params = self.n_params();
        for (name, p) in [("target", &self.target), ("initial", &self.initial)] {
            if let Some(p) = p {
                if p.len() != n_params || p.iter().any(|v| !v.is_finite()) {
                    return bad(format!("{name} must hold {n_params} finite values, got {p:?}"));
                }
            }
        }
        match self.task {
            TaskKind::Xxz => {
                if self.n_qubits < 4 || self.n_qubits % 2 != 0 || self.n_qubits > 16 {
                    return bad(format!("XXZ chain length must be even in [4, 16], got {}", self.n_qubits));
                }
                if self.n_measurements > 27 * (self.n_qubits - 2) {
                    return bad("more XXZ measurements than distinct windows".into());
                }
            }
            TaskKind::Ising => {
                if !(2..=10).contains(&self.n_qubits) {
                    return bad(format!("Ising chain length must be in [2, 10], got {}", self.n_qubits));
                }
                if !(self.action_step > 0.0) {
                    return bad("Ising action step must be positive".into());
                }
                if self.n_measurements > 3usize.pow(self.n_qubits as u32) {
                    return bad("more Ising bases than exist".into());
                }
            }
            TaskKind::Cat | TaskKind::ProcessOutput => {
                if self.task == TaskKind::Cat && !(self.action_step > 0.0) {
                    return bad("cat step β must be positive".into());
                }
                if self.cutoff < crate::cv_env::min_cutoff(num_complex::Complex64::new(crate::cv_env::MAX_AMPLITUDE, 0.0)) {
                    return bad(format!("cutoff {} too small for amplitudes up to 3", self.cutoff));
                }
                if self.n_bins < 2 {
                    return bad("need at least 2 homodyne bins".into());
                }
            }
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        match self.task {
            TaskKind::Ising => self.n_qubits.saturating_sub(1),
            _ => 2,
        }
    }

    pub fn encoding_scheme(&self) -> EncodingScheme {
        match self.task {
            TaskKind::Xxz => EncodingScheme::PauliWindow { n_qubits: self.n_qubits },
            TaskKind::Ising => EncodingScheme::FullBasis { n_qubits: self.n_qubits },
            TaskKind::Cat | TaskKind::ProcessOutput => EncodingScheme::Homodyne { n_bins: self.n_bins },
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.noise_sigma2 == 0.0 && self.shots == 0
    }

    pub fn episode_config(&self, d: usize) -> EpisodeConfig {
        EpisodeConfig {
            max_steps: self.max_steps,
            reward_scale: self.reward_scale,
            terminate_eps: self.terminate_fraction * self.reward_scale / (d as f64).sqrt(),
            d,
        }
    }
}

/// Per-episode constants of the reward and stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub max_steps: usize,
    pub reward_scale: f64,
    /// Episodes stop once `|reward| ≤ terminate_eps`.
    pub terminate_eps: f64,
    pub d: usize,
}

/// `None` ↔ `[]`, since TOML has no null.
mod empty_is_none {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_deref().unwrap_or(&[]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Ok((!v.is_empty()).then_some(v))
    }
}
