use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::{init_mlp, Activation, Mlp, OutputActivation};
use crate::seed::{derive_seed_str, Rng};

/// Either one categorical choice or several independent ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionStructure {
    Discrete(usize),
    MultiDiscrete(Vec<usize>),
}

impl ActionStructure {
    pub fn factors(&self) -> Vec<usize> {
        match self {
            ActionStructure::Discrete(n) => vec![*n],
            ActionStructure::MultiDiscrete(f) => f.clone(),
        }
    }

    /// Number of actor logits.
    pub fn n_logits(&self) -> usize {
        self.factors().iter().sum()
    }

    fn validate(&self) -> Result<()> {
        let f = self.factors();
        if f.is_empty() || f.contains(&0) {
            return Err(Error::validation(format!("invalid action structure {self:?}")));
        }
        Ok(())
    }
}

/// Actor (logits) and critic (state value) networks.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySpec {
    pub actor: Mlp,
    pub critic: Mlp,
    pub action_structure: ActionStructure,
}

impl PolicySpec {
    /// Three-layer tanh networks of width `hidden`. The last actor layer is
    /// scaled down so the initial policy is close to uniform.
    pub fn new(obs_dim: usize, hidden: usize, action_structure: ActionStructure, seed: u64) -> Result<Self> {
        action_structure.validate()?;
        let mut actor = init_mlp(
            &[obs_dim, hidden, hidden, action_structure.n_logits()],
            Activation::Tanh,
            OutputActivation::Identity,
            derive_seed_str(seed, "actor"),
        )?;
        if let Some(last) = actor.layers.last_mut() {
            last.weights *= 0.01;
        }
        let critic = init_mlp(&[obs_dim, hidden, hidden, 1], Activation::Tanh, OutputActivation::Identity, derive_seed_str(seed, "critic"))?;
        Ok(Self { actor, critic, action_structure })
    }

    pub fn from_parts(actor: Mlp, critic: Mlp, action_structure: ActionStructure) -> Result<Self> {
        action_structure.validate()?;
        if actor.n_out() != action_structure.n_logits() || critic.n_out() != 1 || actor.n_in() != critic.n_in() {
            return Err(Error::validation("actor/critic shapes do not match the action structure"));
        }
        if actor.output != OutputActivation::Identity {
            return Err(Error::validation("actor must output raw logits"));
        }
        Ok(Self { actor, critic, action_structure })
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.n_in()
    }

    pub fn value(&self, obs: &[f64]) -> Result<f64> {
        Ok(self.critic.predict(obs)?[0])
    }
}

/// Independent categorical distributions, one per action factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    pub factors: Vec<Vec<f64>>,
}

impl ActionDistribution {
    /// Per-factor softmax of concatenated logits.
    pub fn from_logits(logits: &[f64], structure: &ActionStructure) -> Result<Self> {
        let sizes = structure.factors();
        if logits.len() != sizes.iter().sum::<usize>() {
            return Err(Error::validation("logit count does not match action structure"));
        }
        let mut factors = Vec::with_capacity(sizes.len());
        let mut off = 0;
        for n in sizes {
            let z = &logits[off..off + n];
            let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
            let s: f64 = e.iter().sum();
            factors.push(e.into_iter().map(|v| v / s).collect());
            off += n;
        }
        Ok(Self { factors })
    }

    pub fn log_prob(&self, action: &[usize]) -> Result<f64> {
        if action.len() != self.factors.len() {
            return Err(Error::validation("action has the wrong number of factors"));
        }
        let mut lp = 0.0;
        for (p, &a) in self.factors.iter().zip(action) {
            let pa = *p.get(a).ok_or_else(|| Error::validation(format!("action index {a} out of range")))?;
            lp += pa.ln();
        }
        Ok(lp)
    }

    /// Sum of per-factor entropies (nats).
    pub fn entropy(&self) -> f64 {
        self.factors.iter().map(|p| -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>()).sum()
    }

    pub fn sample(&self, rng: &mut Rng) -> Vec<usize> {
        self.factors
            .iter()
            .map(|p| {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (i, v) in p.iter().enumerate() {
                    acc += v;
                    if u < acc {
                        return i;
                    }
                }
                p.iter().rposition(|&v| v > 0.0).unwrap_or(p.len() - 1)
            })
            .collect()
    }

    /// Most probable choice per factor (first index wins ties).
    pub fn argmax(&self) -> Vec<usize> {
        self.factors
            .iter()
            .map(|p| p.iter().enumerate().fold(0, |best, (i, &v)| if v > p[best] { i } else { best }))
            .collect()
    }
}

pub fn actor_distribution(spec: &PolicySpec, obs: &[f64]) -> Result<ActionDistribution> {
    if obs.len() != spec.obs_dim() {
        return Err(Error::validation(format!("observation has {} entries, policy expects {}", obs.len(), spec.obs_dim())));
    }
    ActionDistribution::from_logits(&spec.actor.predict(obs)?, &spec.action_structure)
}
