//! Multilayer perceptrons with explicit reverse-mode gradients, Adam and
//! global gradient-norm clipping. Samples are stored as matrix columns.

mod adam;
mod mlp;

pub use adam::{adam_step, clip_gradient_norm, gradient_norm, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use mlp::{init_mlp, Activation, ForwardCache, Layer, Mlp, MlpGrads, OutputActivation};
