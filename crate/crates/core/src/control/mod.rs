//! The control loop: environments behind one contract, the
//! representation-distance reward, episode execution, PPO training and
//! evaluation against the (agent-hidden) fidelity.

mod config;
mod env;
mod episode;
mod eval;
mod scenario;
mod train;

pub use config::{CatActionSet, EpisodeConfig, MeasurementPolicy, ProcessActionSet, TaskConfig, TaskKind};
pub use env::{make_environment, ControlEnv, EpisodeStart, Environment, Pairs};
pub use episode::{reward, run_episode, ActionMode, EpisodeRunner, Representer, StepRecord, Trajectory};
pub use eval::{evaluate, within_grid_cell, EvalReport, ScenarioReport};
pub use scenario::{scenario_catalog, Scenario, XXZ_SB, XXZ_TP, XXZ_TR, XXZ_BOUNDARY, CAT_TARGET};
pub use train::{check_policy_compatible, train_rgrl, validation_score, TrainOutput, UpdateRecord};

#[cfg(test)]
mod tests;
