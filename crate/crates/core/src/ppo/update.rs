use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::buffer::{gae_advantages, returns_with_bootstrap, RolloutBuffer};
use super::policy::{ActionDistribution, PolicySpec};
use crate::error::{Error, Result};
use crate::neural::{adam_step, clip_gradient_norm, AdamState, MlpGrads};
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoHyper {
    /// Total environment steps `M`.
    pub total_steps: usize,
    pub minibatch: usize,
    pub epochs: usize,
    pub k_step: usize,
    pub gamma: f64,
    pub clip_eps: f64,
    pub c1: f64,
    pub c2: f64,
    pub g_max: f64,
    pub alpha0: f64,
    pub lambda_gae: f64,
    pub normalize_advantages: bool,
    /// Train on rewards divided by a running return scale.
    pub normalize_rewards: bool,
    /// Independent training runs; the one with the best validation score
    /// (worst-quartile final greedy reward) is kept.
    pub restarts: usize,
    /// Greedy episodes used to score each restart.
    pub validation_episodes: usize,
    /// Hidden width of actor and critic.
    pub hidden: usize,
}

impl Default for PpoHyper {
    fn default() -> Self {
        Self {
            total_steps: 50_000,
            minibatch: 64,
            epochs: 4,
            k_step: 512,
            gamma: 0.99,
            clip_eps: 0.2,
            c1: 0.5,
            c2: 0.01,
            g_max: 0.5,
            alpha0: 4e-4,
            lambda_gae: 0.95,
            normalize_advantages: true,
            normalize_rewards: true,
            restarts: 1,
            validation_episodes: 64,
            hidden: 64,
        }
    }
}

impl PpoHyper {
    pub fn validate(&self) -> Result<()> {
        let ok = self.k_step > 0
            && self.minibatch > 0
            && self.minibatch <= self.k_step
            && self.epochs > 0
            && self.total_steps >= self.k_step
            && (0.0..=1.0).contains(&self.gamma)
            && (0.0..=1.0).contains(&self.lambda_gae)
            && self.clip_eps > 0.0
            && self.c1 >= 0.0
            && self.c2 >= 0.0
            && self.g_max > 0.0
            && self.alpha0 > 0.0
            && self.restarts > 0
            && (self.restarts == 1 || self.validation_episodes > 0)
            && self.hidden > 0;
        if !ok {
            return Err(Error::validation(format!("invalid PPO hyperparameters {self:?}")));
        }
        Ok(())
    }

    pub fn n_updates(&self) -> usize {
        n_updates(self.total_steps, self.k_step)
    }
}

/// Number of full rollout buffers within `total_steps`.
pub fn n_updates(total_steps: usize, k_step: usize) -> usize {
    total_steps / k_step.max(1)
}

/// `α_k = (1 − (k − 1)/M) α₀` for update `k ∈ [1, M]`.
pub fn lr_schedule(k: usize, m_updates: usize, alpha0: f64) -> Result<f64> {
    if k == 0 || k > m_updates {
        return Err(Error::validation(format!("update index {k} outside [1, {m_updates}]")));
    }
    Ok((1.0 - (k - 1) as f64 / m_updates as f64) * alpha0)
}

/// `min(ρA, clip(ρ, 1 − ε, 1 + ε) A)`.
pub fn ppo_clip_objective(ratio: f64, advantage: f64, epsilon: f64) -> f64 {
    (ratio * advantage).min(ratio.clamp(1.0 - epsilon, 1.0 + epsilon) * advantage)
}

/// `Σ p_old log(p_old / p_new)` in nats.
pub fn kl_divergence_diagnostic(old_probs: &[f64], new_probs: &[f64]) -> Result<f64> {
    if old_probs.len() != new_probs.len() {
        return Err(Error::validation("distributions have different supports"));
    }
    let mut kl = 0.0;
    for (&p, &q) in old_probs.iter().zip(new_probs) {
        if p > 0.0 {
            if q <= 0.0 {
                return Err(Error::numeric("new distribution vanishes where the old one does not"));
            }
            kl += p * (p / q).ln();
        }
    }
    Ok(kl.max(0.0))
}

#[derive(Debug, Clone)]
pub struct AdamPair {
    pub actor: AdamState,
    pub critic: AdamState,
}

impl AdamPair {
    pub fn new(spec: &PolicySpec) -> Self {
        Self { actor: AdamState::new(&spec.actor), critic: AdamState::new(&spec.critic) }
    }
}

/// Minibatch averages of the loss terms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SurrogateTerms {
    /// `−mean(min(ρA, clip(ρ)A))`.
    pub policy_loss: f64,
    /// `mean((V − Ĝ)²)`.
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub mean_ratio: f64,
    /// `mean((ρ − 1) − log ρ)`, a nonnegative sample estimate of KL(old‖new).
    pub approx_kl: f64,
}

/// Gradients of `L = −J^CLIP + c1 (V − Ĝ)² − c2 H` over one minibatch, with
/// `L` averaged over samples.
#[allow(clippy::too_many_arguments)]
pub fn surrogate_gradients(
    spec: &PolicySpec,
    observations: &[&[f64]],
    actions: &[&[usize]],
    old_log_probs: &[f64],
    advantages: &[f64],
    returns: &[f64],
    hyper: &PpoHyper,
) -> Result<(SurrogateTerms, MlpGrads, MlpGrads)> {
    let b = observations.len();
    if b == 0 || [actions.len(), old_log_probs.len(), advantages.len(), returns.len()].iter().any(|&n| n != b) {
        return Err(Error::validation("minibatch arrays differ in length"));
    }
    let dim = spec.obs_dim();
    let mut x = DMatrix::zeros(dim, b);
    for (j, o) in observations.iter().enumerate() {
        if o.len() != dim {
            return Err(Error::validation("observation of the wrong size"));
        }
        x.column_mut(j).copy_from_slice(o);
    }
    let (logits, actor_cache) = spec.actor.forward_batch(&x)?;
    let (values, critic_cache) = spec.critic.forward_batch(&x)?;
    let sizes = spec.action_structure.factors();
    let bf = b as f64;
    let mut g_logits = DMatrix::zeros(logits.nrows(), b);
    let mut g_values = DMatrix::zeros(1, b);
    let mut t = SurrogateTerms::default();
    for j in 0..b {
        let col: Vec<f64> = logits.column(j).iter().copied().collect();
        let dist = ActionDistribution::from_logits(&col, &spec.action_structure)?;
        let logp = dist.log_prob(actions[j])?;
        let ratio = (logp - old_log_probs[j]).exp();
        let a = advantages[j];
        t.policy_loss -= ppo_clip_objective(ratio, a, hyper.clip_eps) / bf;
        t.mean_ratio += ratio / bf;
        t.approx_kl += ((ratio - 1.0) - ratio.ln()) / bf;
        let clipped = (ratio - 1.0).abs() > hyper.clip_eps;
        if clipped {
            t.clip_fraction += 1.0 / bf;
        }
        // The min selects a constant branch when the ratio has left the trust
        // region in the direction the advantage favours.
        let inactive = (a > 0.0 && ratio > 1.0 + hyper.clip_eps) || (a < 0.0 && ratio < 1.0 - hyper.clip_eps);
        let d_logp = if inactive { 0.0 } else { -a * ratio / bf };
        let mut off = 0;
        for (f, &n) in sizes.iter().enumerate() {
            let p = &dist.factors[f];
            let h: f64 = -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>();
            t.entropy += h / bf;
            for k in 0..n {
                let onehot = if actions[j][f] == k { 1.0 } else { 0.0 };
                let dlogp_dz = onehot - p[k];
                let dh_dz = if p[k] > 0.0 { -p[k] * (p[k].ln() + h) } else { 0.0 };
                g_logits[(off + k, j)] = d_logp * dlogp_dz - hyper.c2 * dh_dz / bf;
            }
            off += n;
        }
        let diff = values[(0, j)] - returns[j];
        t.value_loss += diff * diff / bf;
        g_values[(0, j)] = 2.0 * hyper.c1 * diff / bf;
    }
    let (ga, _) = spec.actor.backward_batch(&actor_cache, &g_logits)?;
    let (gc, _) = spec.critic.backward_batch(&critic_cache, &g_values)?;
    Ok((t, ga, gc))
}

/// Per-update summary, averaged over all minibatch steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateDiagnostics {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub mean_ratio: f64,
    pub approx_kl: f64,
    /// Exact mean KL(π_old‖π_new) over the buffer's observations.
    pub kl: f64,
    pub grad_norm: f64,
    pub advantage_mean: f64,
    pub advantage_std: f64,
}

/// `K` epochs of seeded minibatch Adam steps on the clipped surrogate.
/// `bootstrap_value` is `V(s)` of the state following the last transition.
pub fn ppo_update(
    spec: &mut PolicySpec,
    buffer: &RolloutBuffer,
    bootstrap_value: f64,
    hyper: &PpoHyper,
    adam: &mut AdamPair,
    lr: f64,
    seed: u64,
) -> Result<UpdateDiagnostics> {
    hyper.validate()?;
    if buffer.len() != hyper.k_step {
        return Err(Error::Contract(format!("update needs a full buffer of {} transitions, got {}", hyper.k_step, buffer.len())));
    }
    let tr = buffer.transitions();
    let rewards: Vec<f64> = tr.iter().map(|t| t.reward).collect();
    let dones: Vec<bool> = tr.iter().map(|t| t.done).collect();
    let mut values: Vec<f64> = tr.iter().map(|t| t.value).collect();
    values.push(bootstrap_value);
    let returns = returns_with_bootstrap(&rewards, hyper.gamma, &dones, bootstrap_value)?;
    let mut adv = gae_advantages(&rewards, &values, hyper.gamma, hyper.lambda_gae, &dones)?;
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let std = (adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
    if hyper.normalize_advantages {
        adv.iter_mut().for_each(|a| *a = (*a - mean) / (std + 1e-8));
    }

    let old: Vec<ActionDistribution> = tr
        .iter()
        .map(|t| super::policy::actor_distribution(spec, &t.observation))
        .collect::<Result<_>>()?;

    let mut diag = UpdateDiagnostics { advantage_mean: mean, advantage_std: std, ..Default::default() };
    let mut rng = rng_from_seed(seed);
    let mut order: Vec<usize> = (0..tr.len()).collect();
    let mut steps = 0usize;
    for _ in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for (mb, chunk) in order.chunks(hyper.minibatch).enumerate() {
            let obs: Vec<&[f64]> = chunk.iter().map(|&i| tr[i].observation.as_slice()).collect();
            let acts: Vec<&[usize]> = chunk.iter().map(|&i| tr[i].action.as_slice()).collect();
            let lp: Vec<f64> = chunk.iter().map(|&i| tr[i].log_prob).collect();
            let a: Vec<f64> = chunk.iter().map(|&i| adv[i]).collect();
            let g: Vec<f64> = chunk.iter().map(|&i| returns[i]).collect();
            let (terms, mut ga, mut gc) = surrogate_gradients(spec, &obs, &acts, &lp, &a, &g, hyper)?;
            let total = terms.policy_loss + hyper.c1 * terms.value_loss - hyper.c2 * terms.entropy;
            if !total.is_finite() {
                return Err(Error::numeric(format!("non-finite PPO loss at minibatch {mb}")));
            }
            diag.grad_norm += clip_gradient_norm(&mut [&mut ga, &mut gc], hyper.g_max)?;
            adam_step(&mut spec.actor, &ga, &mut adam.actor, lr)?;
            adam_step(&mut spec.critic, &gc, &mut adam.critic, lr)?;
            diag.policy_loss += terms.policy_loss;
            diag.value_loss += terms.value_loss;
            diag.entropy += terms.entropy;
            diag.clip_fraction += terms.clip_fraction;
            diag.mean_ratio += terms.mean_ratio;
            diag.approx_kl += terms.approx_kl;
            steps += 1;
        }
    }
    let s = steps as f64;
    for v in [
        &mut diag.policy_loss,
        &mut diag.value_loss,
        &mut diag.entropy,
        &mut diag.clip_fraction,
        &mut diag.mean_ratio,
        &mut diag.approx_kl,
        &mut diag.grad_norm,
    ] {
        *v /= s;
    }
    let mut kl = 0.0;
    for (t, o) in tr.iter().zip(&old) {
        let new = super::policy::actor_distribution(spec, &t.observation)?;
        for (p, q) in o.factors.iter().zip(&new.factors) {
            kl += kl_divergence_diagnostic(p, q)?;
        }
    }
    diag.kl = kl / n;
    Ok(diag)
}
