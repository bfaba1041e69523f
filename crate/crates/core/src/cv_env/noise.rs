use rand_distr::{Binomial, Distribution, Normal};

use crate::error::{Error, Result};
use crate::qcore::OutcomeDistribution;
use crate::seed::rng_from_seed;

/// Adds `N(0, sigma2)` to every entry, clips at zero and renormalizes. If
/// everything clips away the uniform distribution is returned.
pub fn add_measurement_noise(dist: &OutcomeDistribution, sigma2: f64, seed: u64) -> Result<OutcomeDistribution> {
    if !(sigma2.is_finite() && sigma2 >= 0.0) {
        return Err(Error::validation(format!("noise variance must be >= 0, got {sigma2}")));
    }
    if sigma2 == 0.0 {
        return Ok(dist.clone());
    }
    let normal = Normal::new(0.0, sigma2.sqrt()).map_err(|e| Error::validation(e.to_string()))?;
    let mut rng = rng_from_seed(seed);
    let noisy: Vec<f64> = dist.probs().iter().map(|p| (p + normal.sample(&mut rng)).max(0.0)).collect();
    if noisy.iter().all(|&v| v == 0.0) {
        return Ok(OutcomeDistribution::uniform(noisy.len()));
    }
    OutcomeDistribution::from_weights(noisy)
}

/// Empirical frequencies of `shots` seeded draws, sampled as a chain of
/// conditional binomials.
pub fn multinomial_sample(dist: &OutcomeDistribution, shots: u64, seed: u64) -> Result<OutcomeDistribution> {
    if shots == 0 {
        return Err(Error::validation("shots must be >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    let probs = dist.probs();
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() || mass <= p {
            counts[i] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, q).map_err(|e| Error::numeric(e.to_string()))?.sample(&mut rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    let n = shots as f64;
    let mut freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    // Make the sum exactly one by absorbing rounding into the last occupied bin.
    if let Some(last) = counts.iter().rposition(|&c| c > 0) {
        let rest: f64 = freqs.iter().enumerate().filter(|&(i, _)| i != last).map(|(_, f)| f).sum();
        freqs[last] = 1.0 - rest;
    }
    OutcomeDistribution::new(freqs)
}
