use std::collections::HashMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::config::{EpisodeConfig, MeasurementPolicy};
use super::env::{EpisodeStart, Environment, Pairs};
use crate::error::{Error, Result};
use crate::ppo::{actor_distribution, ActionDistribution, PolicySpec};
use crate::repnet::{representation_distance, RepNet, Representation};
use crate::seed::{derive_seed, derive_seed_str, rng_from_seed, Rng};

/// `−C ‖r_k − r_t‖₂ / √d`.
pub fn reward(current: &Representation, target: &Representation, scale: f64, d: usize) -> Result<f64> {
    if current.dim() != d || target.dim() != d {
        return Err(Error::validation(format!("representations of size {} and {} for d = {d}", current.dim(), target.dim())));
    }
    if !(scale > 0.0) {
        return Err(Error::validation(format!("reward scale must be positive, got {scale}")));
    }
    Ok(-scale * representation_distance(current, target)? / (d as f64).sqrt())
}

const CACHE_CAP: usize = 500_000;

/// Encoder front end with an optional per-pair embedding cache, used when
/// the statistics are exact (and so repeat exactly).
pub struct Representer<'a> {
    net: &'a RepNet,
    cache: Option<HashMap<Vec<u64>, Vec<f64>>>,
}

impl<'a> Representer<'a> {
    pub fn new(net: &'a RepNet, cached: bool) -> Self {
        Self { net, cache: cached.then(HashMap::new) }
    }

    pub fn net(&self) -> &RepNet {
        self.net
    }

    pub fn represent(&mut self, pairs: &Pairs) -> Result<Representation> {
        let Some(cache) = self.cache.as_mut() else {
            return self.net.encode(pairs);
        };
        let keys: Vec<Vec<u64>> = pairs
            .iter()
            .map(|(m, d)| m.as_slice().iter().chain(d.probs()).map(|v| v.to_bits()).collect())
            .collect();
        let missing: Vec<usize> = (0..pairs.len()).filter(|&i| !cache.contains_key(&keys[i])).collect();
        let mut fresh = HashMap::new();
        if !missing.is_empty() {
            let refs: Vec<_> = missing.iter().map(|&i| (&pairs[i].0, &pairs[i].1)).collect();
            for (&i, e) in missing.iter().zip(self.net.embed_pairs(&refs)?) {
                fresh.insert(i, e);
            }
        }
        let mut embeddings = Vec::with_capacity(pairs.len());
        for (i, k) in keys.into_iter().enumerate() {
            let e = match fresh.remove(&i) {
                Some(e) => {
                    if cache.len() < CACHE_CAP {
                        cache.insert(k, e.clone());
                    }
                    e
                }
                None => cache[&k].clone(),
            };
            embeddings.push(e);
        }
        Representation::mean_of(embeddings.iter().map(Vec::as_slice))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionMode {
    /// Draw from the policy.
    Sample,
    /// Highest-probability action per factor.
    Greedy,
    /// Uniformly random baseline; the policy is ignored.
    Uniform,
}

/// State after `step` actions. Step 0 is the initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub params: Vec<f64>,
    /// Action that led here; `None` at step 0.
    pub action: Option<Vec<usize>>,
    pub reward: f64,
    pub distance: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: EpisodeStart,
    pub steps: Vec<StepRecord>,
    /// Ended by the distance threshold rather than the step limit.
    pub terminated: bool,
}

impl Trajectory {
    pub fn n_actions(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn final_fidelity(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.fidelity)
    }

    /// Fidelity after `k` actions; an episode that ended early holds its
    /// last state.
    pub fn fidelity_at(&self, k: usize) -> f64 {
        self.steps[k.min(self.steps.len() - 1)].fidelity
    }

    pub fn reward_at(&self, k: usize) -> f64 {
        self.steps[k.min(self.steps.len() - 1)].reward
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().skip(1).map(|s| s.reward).sum()
    }
}

/// One episode in progress. Training drives it step by step so that
/// episodes can span rollout-buffer boundaries.
pub struct EpisodeRunner {
    pub start: EpisodeStart,
    target_rep: Representation,
    current_rep: Representation,
    seed: u64,
    k: usize,
    done: bool,
    record_fidelity: bool,
    records: Vec<StepRecord>,
}

fn abort(k: usize, e: Error) -> Error {
    match e {
        Error::Numeric(m) => Error::Numeric(format!("episode aborted at step {k}: {m}")),
        Error::Convergence { .. } | Error::Validation(_) => Error::Numeric(format!("episode aborted at step {k}: {e}")),
        other => other,
    }
}

impl EpisodeRunner {
    pub fn start(
        env: &mut dyn Environment,
        rep: &mut Representer,
        cfg: &EpisodeConfig,
        start: EpisodeStart,
        seed: u64,
        record_fidelity: bool,
    ) -> Result<Self> {
        env.reset(&start, derive_seed_str(seed, "measurements")).map_err(|e| abort(0, e))?;
        let target_rep = rep.represent(&env.measure_target().map_err(|e| abort(0, e))?)?;
        let current_rep = rep.represent(&env.measure(derive_seed(seed, 0)).map_err(|e| abort(0, e))?)?;
        let r = reward(&current_rep, &target_rep, cfg.reward_scale, cfg.d)?;
        let fid = if record_fidelity { env.fidelity().map_err(|e| abort(0, e))? } else { f64::NAN };
        let done = r.abs() <= cfg.terminate_eps;
        let distance = representation_distance(&current_rep, &target_rep)?;
        let records = vec![StepRecord { step: 0, params: env.params(), action: None, reward: r, distance, fidelity: fid }];
        Ok(Self { start, target_rep, current_rep, seed, k: 0, done, record_fidelity, records })
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn steps_taken(&self) -> usize {
        self.k
    }

    /// `[r_current − r_target, r_target]`: a function of measurement
    /// statistics only.
    pub fn observation(&self) -> Vec<f64> {
        let mut o: Vec<f64> = self.current_rep.0.iter().zip(&self.target_rep.0).map(|(c, t)| c - t).collect();
        o.extend_from_slice(&self.target_rep.0);
        o
    }

    /// Applies `action`, measures and returns `(reward, done)`.
    pub fn advance(&mut self, env: &mut dyn Environment, rep: &mut Representer, cfg: &EpisodeConfig, action: &[usize]) -> Result<(f64, bool)> {
        if self.done {
            return Err(Error::Contract("episode already finished".into()));
        }
        self.k += 1;
        let k = self.k;
        env.step(action).map_err(|e| abort(k, e))?;
        if env.measurement_policy() == MeasurementPolicy::PerStep {
            env.resample_measurements(derive_seed_str(derive_seed(self.seed, k as u64), "measurements")).map_err(|e| abort(k, e))?;
            self.target_rep = rep.represent(&env.measure_target().map_err(|e| abort(k, e))?)?;
        }
        self.current_rep = rep.represent(&env.measure(derive_seed(self.seed, k as u64)).map_err(|e| abort(k, e))?)?;
        let r = reward(&self.current_rep, &self.target_rep, cfg.reward_scale, cfg.d)?;
        if !r.is_finite() {
            return Err(Error::numeric(format!("episode aborted at step {k}: non-finite reward")));
        }
        let fid = if self.record_fidelity { env.fidelity().map_err(|e| abort(k, e))? } else { f64::NAN };
        self.done = r.abs() <= cfg.terminate_eps || k >= cfg.max_steps;
        let distance = representation_distance(&self.current_rep, &self.target_rep)?;
        self.records.push(StepRecord { step: k, params: env.params(), action: Some(action.to_vec()), reward: r, distance, fidelity: fid });
        Ok((r, self.done))
    }

    pub fn finish(self, cfg: &EpisodeConfig) -> Trajectory {
        let last = self.records.last().expect("step 0 recorded");
        let terminated = last.reward.abs() <= cfg.terminate_eps;
        Trajectory { start: self.start, steps: self.records, terminated }
    }
}

pub(crate) fn choose_action(
    policy: Option<&PolicySpec>,
    structure_sizes: &[usize],
    obs: &[f64],
    mode: ActionMode,
    rng: &mut Rng,
) -> Result<(Vec<usize>, Option<ActionDistribution>)> {
    match (mode, policy) {
        (ActionMode::Uniform, _) => Ok((structure_sizes.iter().map(|&n| rng.random_range(0..n)).collect(), None)),
        (_, None) => Err(Error::Contract("policy actions requested without a policy".into())),
        (ActionMode::Sample, Some(p)) => {
            let d = actor_distribution(p, obs)?;
            Ok((d.sample(rng), Some(d)))
        }
        (ActionMode::Greedy, Some(p)) => {
            let d = actor_distribution(p, obs)?;
            Ok((d.argmax(), Some(d)))
        }
    }
}

/// Measure → encode → observe → act → step → reward, until the distance
/// threshold or `T` actions.
pub fn run_episode(
    env: &mut dyn Environment,
    policy: Option<&PolicySpec>,
    rep: &mut Representer,
    cfg: &EpisodeConfig,
    start: EpisodeStart,
    mode: ActionMode,
    seed: u64,
) -> Result<Trajectory> {
    let sizes = env.action_structure().factors();
    let mut rng = rng_from_seed(derive_seed_str(seed, "actions"));
    let mut ep = EpisodeRunner::start(env, rep, cfg, start, seed, true)?;
    while !ep.is_done() {
        let (a, _) = choose_action(policy, &sizes, &ep.observation(), mode, &mut rng)?;
        ep.advance(env, rep, cfg, &a)?;
    }
    Ok(ep.finish(cfg))
}
