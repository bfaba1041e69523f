use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub action: Vec<usize>,
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    /// The episode ended after this step.
    pub done: bool,
}

/// Fixed-capacity on-policy storage, cleared after every update.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutBuffer {
    transitions: Vec<Transition>,
    capacity: usize,
}

impl RolloutBuffer {
    pub fn new(capacity: usize) -> Self {
        Self { transitions: Vec::with_capacity(capacity), capacity }
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if self.is_full() {
            return Err(Error::Contract("rollout buffer is full".into()));
        }
        if !t.reward.is_finite() || t.log_prob > 1e-12 {
            return Err(Error::validation(format!("invalid transition: reward {}, log_prob {}", t.reward, t.log_prob)));
        }
        self.transitions.push(t);
        Ok(())
    }

    pub fn is_full(&self) -> bool {
        self.transitions.len() >= self.capacity
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn clear(&mut self) {
        self.transitions.clear();
    }
}

/// `Ĝ_t = r_t + γ Ĝ_{t+1}`, restarting after every `done`.
pub fn rewards_to_go(rewards: &[f64], gamma: f64, dones: &[bool]) -> Result<Vec<f64>> {
    returns_with_bootstrap(rewards, gamma, dones, 0.0)
}

/// As [`rewards_to_go`], with `bootstrap` standing in for the return after
/// the last step when that step is not terminal.
pub fn returns_with_bootstrap(rewards: &[f64], gamma: f64, dones: &[bool], bootstrap: f64) -> Result<Vec<f64>> {
    if rewards.len() != dones.len() {
        return Err(Error::validation("rewards and dones differ in length"));
    }
    let mut out = vec![0.0; rewards.len()];
    let mut next = bootstrap;
    for t in (0..rewards.len()).rev() {
        if dones[t] {
            next = 0.0;
        }
        next = rewards[t] + gamma * next;
        out[t] = next;
    }
    Ok(out)
}

/// Generalized advantage estimates. `values` has one more entry than
/// `rewards`: the value of the state after the last step.
pub fn gae_advantages(rewards: &[f64], values: &[f64], gamma: f64, lambda: f64, dones: &[bool]) -> Result<Vec<f64>> {
    if rewards.len() != dones.len() || values.len() != rewards.len() + 1 {
        return Err(Error::validation("values must have one more entry than rewards and dones"));
    }
    let mut adv = vec![0.0; rewards.len()];
    let mut next = 0.0;
    for t in (0..rewards.len()).rev() {
        let cont = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * values[t + 1] * cont - values[t];
        next = delta + gamma * lambda * cont * next;
        adv[t] = next;
    }
    Ok(adv)
}

/// Divides rewards by a running standard deviation of the discounted
/// return, so that critic targets stay near unit scale whatever the
/// representation's metric scale.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardScaler {
    gamma: f64,
    running: f64,
    count: f64,
    mean: f64,
    m2: f64,
}

impl RewardScaler {
    pub fn new(gamma: f64) -> Self {
        Self { gamma, running: 0.0, count: 0.0, mean: 0.0, m2: 0.0 }
    }

    /// Current divisor; 1 until two returns have been seen.
    pub fn scale(&self) -> f64 {
        if self.count < 2.0 {
            return 1.0;
        }
        (self.m2 / self.count + 1e-8).sqrt()
    }

    /// Folds `reward` into the running return and returns it rescaled.
    pub fn push(&mut self, reward: f64, done: bool) -> f64 {
        self.running = self.gamma * self.running + reward;
        self.count += 1.0;
        let delta = self.running - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (self.running - self.mean);
        if done {
            self.running = 0.0;
        }
        reward / self.scale()
    }
}
