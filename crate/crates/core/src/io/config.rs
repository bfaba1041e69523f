use serde::{Deserialize, Serialize};

use super::dataset::DatasetOptions;
use crate::control::{ActionMode, TaskConfig, TaskKind};
use crate::error::{Error, Result};
use crate::ppo::PpoHyper;
use crate::repnet::{RepNetHyper, RepNetMode};

pub type DataSection = DatasetOptions;
pub type PpoSection = PpoHyper;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `M = 2048` and small datasets, for checking a pipeline end to end.
    Smoke,
    Full,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoke" => Ok(Preset::Smoke),
            "full" => Ok(Preset::Full),
            _ => Err(Error::validation(format!("unknown preset {s:?} (expected smoke or full)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RepNetSection {
    pub mode: RepNetMode,
    pub d: usize,
    pub epochs: usize,
    pub lr: f64,
    pub batch_states: usize,
    pub context_size: usize,
    pub queries_per_state: usize,
    /// Global gradient-norm bound; 0 disables clipping.
    pub grad_clip: f64,
    pub final_lr_fraction: f64,
    /// Corrupt training contexts with the task's measurement noise.
    pub noisy_contexts: bool,
}

impl Default for RepNetSection {
    fn default() -> Self {
        Self::defaults(TaskKind::Cat)
    }
}

impl RepNetSection {
    pub fn defaults(task: TaskKind) -> Self {
        let h = RepNetHyper::default();
        let base = Self {
            mode: RepNetMode::Generative,
            d: 32,
            epochs: h.epochs,
            lr: h.lr,
            batch_states: h.batch_states,
            context_size: 3,
            queries_per_state: h.queries_per_state,
            grad_clip: h.grad_clip.unwrap_or(0.0),
            final_lr_fraction: h.final_lr_fraction,
            noisy_contexts: true,
        };
        match task {
            TaskKind::Xxz => Self { context_size: 50, epochs: 300, lr: 3e-3, ..base },
            TaskKind::Ising => Self { context_size: 5, ..base },
            TaskKind::Cat | TaskKind::ProcessOutput => Self { epochs: 300, lr: 3e-3, ..base },
        }
    }

    /// Training hyperparameters for a task whose measurements carry noise of
    /// variance `task_noise_sigma2`.
    pub fn hyper(&self, task_noise_sigma2: f64, seed: u64) -> RepNetHyper {
        RepNetHyper {
            epochs: self.epochs,
            lr: self.lr,
            batch_states: self.batch_states,
            context_size: self.context_size,
            queries_per_state: self.queries_per_state,
            grad_clip: (self.grad_clip > 0.0).then_some(self.grad_clip),
            final_lr_fraction: self.final_lr_fraction,
            context_noise_sigma2: if self.noisy_contexts { task_noise_sigma2 } else { 0.0 },
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSection {
    pub n_experiments: usize,
    /// Catalog scenario names; empty selects every scenario of the task.
    pub scenarios: Vec<String>,
    pub mode: ActionMode,
    /// Also evaluate a uniformly random policy.
    pub baseline: bool,
    /// Export Wigner grids of every scenario's initial and final state (CV tasks).
    pub wigner: bool,
    /// Export PCA coordinates of the representation along each trajectory.
    pub pca: bool,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self { n_experiments: 100, scenarios: Vec::new(), mode: ActionMode::Greedy, baseline: true, wigner: false, pca: true }
    }
}

/// Complete configuration of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub task: TaskConfig,
    pub data: DataSection,
    pub repnet: RepNetSection,
    pub ppo: PpoSection,
    pub eval: EvalSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::defaults(TaskKind::Cat)
    }
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn flatten(prefix: &str, v: &toml::Value, out: &mut Vec<String>) {
    match v {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        other => out.push(format!("{prefix} = {other}")),
    }
}

impl RunConfig {
    pub fn defaults(task: TaskKind) -> Self {
        Self {
            seed: 0,
            task: TaskConfig::defaults(task),
            data: DatasetOptions::defaults(task),
            repnet: RepNetSection::defaults(task),
            ppo: match task {
                TaskKind::Cat => PpoHyper { restarts: 6, ..PpoHyper::default() },
                _ => PpoHyper::default(),
            },
            eval: EvalSection::default(),
        }
    }

    pub fn apply_preset(&mut self, preset: Preset) {
        match preset {
            Preset::Full => self.ppo.total_steps = PpoHyper::default().total_steps,
            Preset::Smoke => {
                self.ppo.total_steps = 2048;
                self.ppo.restarts = 1;
                self.repnet.epochs = self.repnet.epochs.min(3);
                if self.task.task != TaskKind::Xxz {
                    self.data.n_states = self.data.n_states.min(40);
                }
                self.eval.n_experiments = self.eval.n_experiments.min(4);
            }
        }
    }

    /// Task defaults, then the preset, then the keys present in `text`.
    pub fn from_toml_str(text: &str, preset: Option<Preset>) -> Result<Self> {
        let over: toml::Value = toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))?;
        let kind = match over.get("task").and_then(|t| t.get("kind")).and_then(|k| k.as_str()) {
            Some(k) => k.parse()?,
            None => TaskKind::Cat,
        };
        let mut base = Self::defaults(kind);
        if let Some(p) = preset {
            base.apply_preset(p);
        }
        let mut value = toml::Value::try_from(&base).map_err(|e| Error::Format(format!("config: {e}")))?;
        merge(&mut value, over);
        let cfg: Self = value.try_into().map_err(|e| Error::Format(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// One `namespace.key = value` line per field.
    pub fn to_flat_toml(&self) -> Result<String> {
        let v = toml::Value::try_from(self).map_err(|e| Error::Format(format!("config: {e}")))?;
        let mut lines = Vec::new();
        flatten("", &v, &mut lines);
        let mut s = lines.join("\n");
        s.push('\n');
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.task.validate()?;
        self.ppo.validate()?;
        if ![32, 96].contains(&self.repnet.d) {
            return Err(Error::validation(format!("repnet.d must be 32 or 96, got {}", self.repnet.d)));
        }
        if self.repnet.mode == RepNetMode::Property && matches!(self.task.task, TaskKind::Cat | TaskKind::ProcessOutput) {
            return Err(Error::validation("property mode needs mutual-information labels, which only spin tasks provide"));
        }
        if self.eval.n_experiments == 0 {
            return Err(Error::validation("eval.n_experiments must be positive"));
        }
        Ok(())
    }
}
