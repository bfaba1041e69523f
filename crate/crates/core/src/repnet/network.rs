use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::encoding::{EncodingScheme, MeasurementEncoding};
use crate::error::{Error, Result};
use crate::neural::{init_mlp, Activation, Mlp, OutputActivation};
use crate::qcore::OutcomeDistribution;
use crate::seed::derive_seed_str;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepNetMode {
    Generative,
    Property,
}

impl RepNetMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RepNetMode::Generative => "generative",
            RepNetMode::Property => "property",
        }
    }
}

impl std::str::FromStr for RepNetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generative" => Ok(RepNetMode::Generative),
            "property" => Ok(RepNetMode::Property),
            _ => Err(Error::validation(format!("unknown repnet mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepNetConfig {
    pub mode: RepNetMode,
    pub d: usize,
    pub hidden: usize,
    pub scheme: EncodingScheme,
}

impl RepNetConfig {
    pub fn new(mode: RepNetMode, d: usize, scheme: EncodingScheme) -> Self {
        Self { mode, d, hidden: 128, scheme }
    }

    pub fn validate(&self) -> Result<()> {
        if ![32, 96].contains(&self.d) {
            return Err(Error::validation(format!("representation dimension must be 32 or 96, got {}", self.d)));
        }
        if self.hidden == 0 {
            return Err(Error::validation("hidden width must be positive"));
        }
        Ok(())
    }
}

/// State representation produced by the encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Representation(pub Vec<f64>);

impl Representation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Mean of per-pair embeddings.
    pub fn mean_of<'a>(embeddings: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let mut acc: Vec<f64> = Vec::new();
        let mut n = 0usize;
        for e in embeddings {
            if acc.is_empty() {
                acc = vec![0.0; e.len()];
            } else if e.len() != acc.len() {
                return Err(Error::validation("embeddings of different lengths"));
            }
            acc.iter_mut().zip(e).for_each(|(a, b)| *a += b);
            n += 1;
        }
        if n == 0 {
            return Err(Error::validation("cannot average an empty set of embeddings"));
        }
        acc.iter_mut().for_each(|a| *a /= n as f64);
        Ok(Self(acc))
    }
}

pub fn representation_distance(a: &Representation, b: &Representation) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::validation(format!("representation dimensions differ: {} vs {}", a.dim(), b.dim())));
    }
    Ok(a.0.iter().zip(&b.0).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

/// Encoder plus the head used by its training mode.
#[derive(Debug, Clone, PartialEq)]
pub struct RepNet {
    pub config: RepNetConfig,
    pub encoder: Mlp,
    /// Generative mode: `(r ++ m) → outcome distribution`.
    pub decoder: Option<Mlp>,
    /// Property mode: `r → scalar`.
    pub predictor: Option<Mlp>,
}

impl RepNet {
    pub fn new(config: RepNetConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let (m, o, h, d) = (config.scheme.measurement_dim(), config.scheme.outcome_dim(), config.hidden, config.d);
        let encoder = init_mlp(&[m + o, h, h, d], Activation::Tanh, OutputActivation::Identity, derive_seed_str(seed, "encoder"))?;
        let (decoder, predictor) = match config.mode {
            RepNetMode::Generative => (
                Some(init_mlp(&[d + m, h, h, o], Activation::Tanh, OutputActivation::Softmax, derive_seed_str(seed, "decoder"))?),
                None,
            ),
            RepNetMode::Property => (
                None,
                Some(init_mlp(&[d, h, h, 1], Activation::Tanh, OutputActivation::Identity, derive_seed_str(seed, "predictor"))?),
            ),
        };
        Ok(Self { config, encoder, decoder, predictor })
    }

    /// Reassembles a network from stored parts, checking shapes.
    pub fn from_parts(config: RepNetConfig, encoder: Mlp, decoder: Option<Mlp>, predictor: Option<Mlp>) -> Result<Self> {
        config.validate()?;
        let (m, o, d) = (config.scheme.measurement_dim(), config.scheme.outcome_dim(), config.d);
        if encoder.n_in() != m + o || encoder.n_out() != d {
            return Err(Error::validation("encoder shape does not match configuration"));
        }
        match (config.mode, &decoder, &predictor) {
            (RepNetMode::Generative, Some(dec), None) if dec.n_in() == d + m && dec.n_out() == o => {}
            (RepNetMode::Property, None, Some(p)) if p.n_in() == d && p.n_out() == 1 => {}
            _ => return Err(Error::validation("head networks do not match the configured mode")),
        }
        Ok(Self { config, encoder, decoder, predictor })
    }

    pub fn d(&self) -> usize {
        self.config.d
    }

    pub fn mode(&self) -> RepNetMode {
        self.config.mode
    }

    /// Encoder inputs `m ++ d`, one column per pair.
    pub(crate) fn pair_matrix(&self, pairs: &[(&MeasurementEncoding, &OutcomeDistribution)]) -> Result<DMatrix<f64>> {
        let (m, o) = (self.config.scheme.measurement_dim(), self.config.scheme.outcome_dim());
        let mut x = DMatrix::zeros(m + o, pairs.len());
        for (j, (enc, dist)) in pairs.iter().enumerate() {
            if enc.len() != m || dist.len() != o {
                return Err(Error::validation(format!(
                    "pair {j} has sizes ({}, {}), expected ({m}, {o})",
                    enc.len(),
                    dist.len()
                )));
            }
            let mut col = x.column_mut(j);
            col.rows_mut(0, m).copy_from_slice(enc.as_slice());
            col.rows_mut(m, o).copy_from_slice(dist.probs());
        }
        Ok(x)
    }

    /// Encoder output for each pair separately.
    pub fn embed_pairs(&self, pairs: &[(&MeasurementEncoding, &OutcomeDistribution)]) -> Result<Vec<Vec<f64>>> {
        if pairs.is_empty() {
            return Ok(Vec::new());
        }
        let y = self.encoder.predict_batch(&self.pair_matrix(pairs)?)?;
        Ok(y.column_iter().map(|c| c.iter().copied().collect()).collect())
    }

    /// `r = mean_i encoder(m_i ++ d_i)`.
    pub fn encode(&self, pairs: &[(MeasurementEncoding, OutcomeDistribution)]) -> Result<Representation> {
        let refs: Vec<_> = pairs.iter().map(|(m, d)| (m, d)).collect();
        self.encode_refs(&refs)
    }

    pub fn encode_refs(&self, pairs: &[(&MeasurementEncoding, &OutcomeDistribution)]) -> Result<Representation> {
        if pairs.is_empty() {
            return Err(Error::validation("cannot encode an empty measurement set"));
        }
        let e = self.embed_pairs(pairs)?;
        Representation::mean_of(e.iter().map(Vec::as_slice))
    }

    pub fn generate(&self, r: &Representation, query: &MeasurementEncoding) -> Result<OutcomeDistribution> {
        let dec = self
            .decoder
            .as_ref()
            .ok_or_else(|| Error::Contract("generate requires a generative-mode network".into()))?;
        if r.dim() != self.d() || query.len() != self.config.scheme.measurement_dim() {
            return Err(Error::validation("representation or query has the wrong size"));
        }
        let input: Vec<f64> = r.as_slice().iter().chain(query.as_slice()).copied().collect();
        OutcomeDistribution::from_weights(dec.predict(&input)?)
    }

    pub fn predict_property(&self, r: &Representation) -> Result<f64> {
        let p = self
            .predictor
            .as_ref()
            .ok_or_else(|| Error::Contract("predict_property requires a property-mode network".into()))?;
        if r.dim() != self.d() {
            return Err(Error::validation("representation has the wrong size"));
        }
        Ok(p.predict(r.as_slice())?[0])
    }
}
