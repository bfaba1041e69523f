use serde::{Deserialize, Serialize};

use super::config::EpisodeConfig;
use super::env::{EpisodeStart, Environment};
use super::episode::{run_episode, ActionMode, Representer, Trajectory};
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::ppo::PolicySpec;
use crate::repnet::RepNet;
use crate::seed::{derive_seed, derive_seed_str, rng_from_seed};
use crate::spin_env::XxzGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub n_experiments: usize,
    /// Mean fidelity after `T` actions.
    pub mean_fidelity: f64,
    /// Normal-approximation 95% half-width.
    pub ci_half_width: f64,
    /// Set when `n < 2`, so the interval carries no information.
    pub ci_degenerate: bool,
    pub mean_initial_fidelity: f64,
    /// Mean fidelity after `k` actions for `k = 0..=T`.
    pub fidelity_curve: Vec<f64>,
    pub reward_curve: Vec<f64>,
    pub trajectories: Vec<Trajectory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: ActionMode,
    pub horizon: usize,
    pub scenarios: Vec<ScenarioReport>,
}

impl EvalReport {
    pub fn scenario(&self, name: &str) -> Option<&ScenarioReport> {
        self.scenarios.iter().find(|s| s.name == name)
    }
}

/// Both XXZ parameters within one grid step of the target.
pub fn within_grid_cell(params: &[f64], target: &[f64]) -> bool {
    let g = XxzGrid::default();
    params.len() == 2
        && target.len() == 2
        && (params[0] - target[0]).abs() <= g.j_step() + 1e-9
        && (params[1] - target[1]).abs() <= g.delta_step() + 1e-9
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `n_experiments` episodes per scenario; experiment `i` of scenario `s`
/// uses seed `derive_seed_str(seed, "s/i")`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    env: &mut dyn Environment,
    policy: Option<&PolicySpec>,
    net: &RepNet,
    scenarios: &[Scenario],
    n_experiments: usize,
    cfg: &EpisodeConfig,
    mode: ActionMode,
    seed: u64,
) -> Result<EvalReport> {
    if n_experiments == 0 {
        return Err(Error::validation("n_experiments must be positive"));
    }
    if let Some(p) = policy {
        super::train::check_policy_compatible(p, net, env)?;
    }
    let mut rep = Representer::new(net, env.is_noiseless());
    let mut reports = Vec::with_capacity(scenarios.len());
    for sc in scenarios {
        if sc.task != env.task() {
            return Err(Error::validation(format!("scenario {} is for task {:?}, environment is {:?}", sc.name, sc.task, env.task())));
        }
        let mut trajectories = Vec::with_capacity(n_experiments);
        for i in 0..n_experiments {
            let s = derive_seed_str(seed, &format!("{}/{i}", sc.name));
            let drawn = env.sample_start(&mut rng_from_seed(derive_seed(s, 1)));
            let start = EpisodeStart {
                initial: sc.initial.clone().unwrap_or(drawn.initial),
                target: sc.target.clone().unwrap_or(drawn.target),
            };
            trajectories.push(run_episode(env, policy, &mut rep, cfg, start, mode, s)?);
        }
        let horizon = cfg.max_steps;
        let finals: Vec<f64> = trajectories.iter().map(|t| t.fidelity_at(horizon)).collect();
        let n = finals.len();
        let m = mean(&finals);
        let (half, degenerate) = if n < 2 {
            (0.0, true)
        } else {
            let var = finals.iter().map(|f| (f - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            (1.96 * (var / n as f64).sqrt(), false)
        };
        let fidelity_curve = (0..=horizon).map(|k| mean(&trajectories.iter().map(|t| t.fidelity_at(k)).collect::<Vec<_>>())).collect();
        let reward_curve = (0..=horizon).map(|k| mean(&trajectories.iter().map(|t| t.reward_at(k)).collect::<Vec<_>>())).collect();
        reports.push(ScenarioReport {
            name: sc.name.clone(),
            n_experiments: n,
            mean_fidelity: m,
            ci_half_width: half,
            ci_degenerate: degenerate,
            mean_initial_fidelity: mean(&trajectories.iter().map(|t| t.fidelity_at(0)).collect::<Vec<_>>()),
            fidelity_curve,
            reward_curve,
            trajectories,
        });
    }
    Ok(EvalReport { mode, horizon: cfg.max_steps, scenarios: reports })
}
