use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sum tolerance accepted by [`OutcomeDistribution::new`].
const SUM_TOL: f64 = 1e-8;

/// Outcome probabilities (or empirical frequencies) of one measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutcomeDistribution(Vec<f64>);

impl OutcomeDistribution {
    /// Validates nonnegativity and unit sum. Entries in `(-1e-12, 0)` from
    /// rounding are clamped to zero.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::validation("empty outcome distribution"));
        }
        for p in &mut probs {
            if !p.is_finite() {
                return Err(Error::numeric("non-finite probability"));
            }
            if *p < 0.0 {
                if *p > -1e-12 {
                    *p = 0.0;
                } else {
                    return Err(Error::validation(format!("negative probability {p}")));
                }
            }
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::validation(format!("probabilities sum to {s}")));
        }
        Ok(Self(probs))
    }

    /// Rescales a nonnegative vector to unit sum.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let s: f64 = weights.iter().sum();
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::numeric(format!("cannot normalize weights with sum {s}")));
        }
        Self::new(weights.into_iter().map(|w| w / s).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total-variation distance `½ Σ |p - q|`.
    pub fn total_variation(&self, other: &Self) -> f64 {
        0.5 * self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self.0.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>()
    }
}
