//! PPO-Clip actor-critic: categorical (multi-discrete) policies, returns and
//! advantage estimation, the clipped surrogate update and its diagnostics.

mod buffer;
mod policy;
mod update;

pub use buffer::{gae_advantages, rewards_to_go, returns_with_bootstrap, RewardScaler, RolloutBuffer, Transition};
pub use policy::{actor_distribution, ActionDistribution, ActionStructure, PolicySpec};
pub use update::{
    kl_divergence_diagnostic, lr_schedule, n_updates, ppo_clip_objective, ppo_update, surrogate_gradients, AdamPair,
    PpoHyper, SurrogateTerms, UpdateDiagnostics,
};
