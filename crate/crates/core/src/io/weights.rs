use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::files::{check_version, FORMAT_VERSION};
use crate::control::TaskKind;
use crate::error::{Error, Result};
use crate::neural::{Activation, Layer, Mlp, OutputActivation};
use crate::ppo::{ActionStructure, PolicySpec};
use crate::repnet::{RepNet, RepNetConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerFile {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `n_out × n_in`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpFile {
    pub hidden: Activation,
    pub output: OutputActivation,
    pub layers: Vec<LayerFile>,
}

impl MlpFile {
    pub fn from_mlp(m: &Mlp) -> Self {
        let layers = m
            .layers
            .iter()
            .map(|l| LayerFile {
                n_in: l.n_in(),
                n_out: l.n_out(),
                weights: l.weights.transpose().iter().copied().collect(),
                bias: l.bias.iter().copied().collect(),
            })
            .collect();
        Self { hidden: m.hidden, output: m.output, layers }
    }

    pub fn to_mlp(&self) -> Result<Mlp> {
        let layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(k, l)| {
                if l.weights.len() != l.n_in * l.n_out || l.bias.len() != l.n_out {
                    return Err(Error::Format(format!("layer {k}: stored sizes do not match {}×{}", l.n_out, l.n_in)));
                }
                Ok(Layer { weights: DMatrix::from_row_slice(l.n_out, l.n_in, &l.weights), bias: DVector::from_column_slice(&l.bias) })
            })
            .collect::<Result<_>>()?;
        Mlp::from_layers(layers, self.hidden, self.output)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepNetFile {
    pub format_version: String,
    pub config: RepNetConfig,
    pub task: TaskKind,
    pub encoder: MlpFile,
    pub decoder: Option<MlpFile>,
    pub predictor: Option<MlpFile>,
    pub loss_trace: Vec<f64>,
}

impl RepNetFile {
    pub fn new(net: &RepNet, task: TaskKind, loss_trace: Vec<f64>) -> Self {
        Self {
            format_version: FORMAT_VERSION.into(),
            config: net.config,
            task,
            encoder: MlpFile::from_mlp(&net.encoder),
            decoder: net.decoder.as_ref().map(MlpFile::from_mlp),
            predictor: net.predictor.as_ref().map(MlpFile::from_mlp),
            loss_trace,
        }
    }

    pub fn to_net(&self) -> Result<RepNet> {
        check_version(&self.format_version, "repnet weights")?;
        RepNet::from_parts(
            self.config,
            self.encoder.to_mlp()?,
            self.decoder.as_ref().map(MlpFile::to_mlp).transpose()?,
            self.predictor.as_ref().map(MlpFile::to_mlp).transpose()?,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub format_version: String,
    pub task: TaskKind,
    pub action_structure: ActionStructure,
    /// Representation dimension the policy was trained against.
    pub d: usize,
    pub actor: MlpFile,
    pub critic: MlpFile,
}

impl PolicyFile {
    pub fn new(policy: &PolicySpec, task: TaskKind, d: usize) -> Self {
        Self {
            format_version: FORMAT_VERSION.into(),
            task,
            action_structure: policy.action_structure.clone(),
            d,
            actor: MlpFile::from_mlp(&policy.actor),
            critic: MlpFile::from_mlp(&policy.critic),
        }
    }

    pub fn to_policy(&self) -> Result<PolicySpec> {
        check_version(&self.format_version, "policy weights")?;
        PolicySpec::from_parts(self.actor.to_mlp()?, self.critic.to_mlp()?, self.action_structure.clone())
    }
}
