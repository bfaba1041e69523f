use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::encoding::MeasurementEncoding;
use super::network::{RepNet, RepNetConfig, RepNetMode, Representation};
use crate::cv_env::add_measurement_noise;
use crate::error::{Error, Result};
use crate::neural::{adam_step, clip_gradient_norm, AdamState, MlpGrads};
use crate::qcore::OutcomeDistribution;
use crate::seed::{derive_seed, derive_seed_str, rng_from_seed, Rng};

/// All measurements available for one training state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub pairs: Vec<(MeasurementEncoding, OutcomeDistribution)>,
    /// Property-mode regression target.
    pub label: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepNetHyper {
    pub epochs: usize,
    pub lr: f64,
    /// States per Adam step.
    pub batch_states: usize,
    /// Context measurements drawn per state and step.
    pub context_size: usize,
    /// Held-out query measurements per state and step; 0 uses the whole
    /// complement of the context.
    pub queries_per_state: usize,
    pub grad_clip: Option<f64>,
    /// The learning rate decays linearly per epoch from `lr` to
    /// `lr · final_lr_fraction`.
    pub final_lr_fraction: f64,
    /// Gaussian noise variance applied to context statistics (never to
    /// queries), matching a noisy deployment; 0 trains on clean contexts.
    #[serde(default)]
    pub context_noise_sigma2: f64,
    pub seed: u64,
}

impl Default for RepNetHyper {
    fn default() -> Self {
        Self { epochs: 100, lr: 1e-3, batch_states: 16, context_size: 50, queries_per_state: 16, grad_clip: Some(1.0), final_lr_fraction: 0.1, context_noise_sigma2: 0.0, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub net: RepNet,
    /// Mean training loss over each epoch.
    pub loss_trace: Vec<f64>,
}

/// Random context / query split of one record.
fn split(n: usize, hyper: &RepNetHyper, need_queries: bool, rng: &mut Rng) -> Result<(Vec<usize>, Vec<usize>)> {
    let min = usize::from(need_queries) + 1;
    if n < min {
        return Err(Error::validation(format!("record with {n} measurements cannot be split into context and queries")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let c = hyper.context_size.clamp(1, n - usize::from(need_queries));
    let rest = n - c;
    let q = if hyper.queries_per_state == 0 { rest } else { hyper.queries_per_state.min(rest) };
    let queries = if need_queries { idx[c..c + q].to_vec() } else { Vec::new() };
    idx.truncate(c);
    Ok((idx, queries))
}

struct Step<'a> {
    net: &'a RepNet,
    enc_grads: MlpGrads,
    head_grads: MlpGrads,
}

impl<'a> Step<'a> {
    fn new(net: &'a RepNet) -> Self {
        let head = net.decoder.as_ref().or(net.predictor.as_ref()).expect("network has a head");
        Self { net, enc_grads: net.encoder.zero_grads(), head_grads: head.zero_grads() }
    }

    /// Loss of one record; gradients scaled by `weight` are accumulated.
    fn accumulate(&mut self, rec: &TrainingRecord, ctx: &[usize], queries: &[usize], noise: Option<(f64, u64)>, weight: f64) -> Result<f64> {
        let net = self.net;
        let noisy: Vec<OutcomeDistribution> = match noise {
            Some((s2, seed)) => {
                ctx.iter().enumerate().map(|(j, &i)| add_measurement_noise(&rec.pairs[i].1, s2, derive_seed(seed, j as u64))).collect::<Result<_>>()?
            }
            None => Vec::new(),
        };
        let pairs: Vec<_> = if noise.is_some() {
            ctx.iter().zip(&noisy).map(|(&i, d)| (&rec.pairs[i].0, d)).collect()
        } else {
            ctx.iter().map(|&i| (&rec.pairs[i].0, &rec.pairs[i].1)).collect()
        };
        let x = net.pair_matrix(&pairs)?;
        let (emb, enc_cache) = net.encoder.forward_batch(&x)?;
        let d = net.d();
        let r = emb.column_mean();
        let (loss, dr) = match net.mode() {
            RepNetMode::Generative => {
                let dec = net.decoder.as_ref().expect("generative head");
                let m = net.config.scheme.measurement_dim();
                let mut qin = DMatrix::zeros(d + m, queries.len());
                for (j, &qi) in queries.iter().enumerate() {
                    let mut col = qin.column_mut(j);
                    col.rows_mut(0, d).copy_from(&r);
                    col.rows_mut(d, m).copy_from_slice(rec.pairs[qi].0.as_slice());
                }
                let (pred, cache) = dec.forward_batch(&qin)?;
                let nq = queries.len() as f64;
                let mut loss = 0.0;
                let mut g = DMatrix::zeros(pred.nrows(), pred.ncols());
                for (j, &qi) in queries.iter().enumerate() {
                    for (k, &p) in rec.pairs[qi].1.probs().iter().enumerate() {
                        if p > 0.0 {
                            let y = pred[(k, j)].max(1e-300);
                            loss -= p * y.ln() / nq;
                            g[(k, j)] = -weight * p / (y * nq);
                        }
                    }
                }
                let dq = dec.backward_into(&cache, &g, &mut self.head_grads)?;
                let dr = dq.rows(0, d).column_sum();
                (loss, dr)
            }
            RepNetMode::Property => {
                let pred_net = net.predictor.as_ref().expect("property head");
                let label = rec.label.ok_or_else(|| Error::validation("property-mode record without a label"))?;
                let (y, cache) = pred_net.forward_batch(&DMatrix::from_column_slice(d, 1, r.as_slice()))?;
                let diff = y[(0, 0)] - label;
                let g = DMatrix::from_element(1, 1, 2.0 * diff * weight);
                let dr = pred_net.backward_into(&cache, &g, &mut self.head_grads)?;
                (diff * diff, dr.column(0).into_owned())
            }
        };
        let c = ctx.len() as f64;
        let mut ge = DMatrix::zeros(d, ctx.len());
        for mut col in ge.column_iter_mut() {
            col.copy_from(&(&dr / c));
        }
        net.encoder.backward_into(&enc_cache, &ge, &mut self.enc_grads)?;
        Ok(loss)
    }
}

fn train(records: &[TrainingRecord], config: RepNetConfig, hyper: &RepNetHyper) -> Result<TrainingRun> {
    if records.is_empty() {
        return Err(Error::validation("empty training set"));
    }
    if hyper.epochs == 0
        || hyper.batch_states == 0
        || !(hyper.lr > 0.0)
        || !(0.0..=1.0).contains(&hyper.final_lr_fraction)
        || !(hyper.context_noise_sigma2 >= 0.0)
    {
        return Err(Error::validation(format!("invalid training hyperparameters {hyper:?}")));
    }
    let need_queries = config.mode == RepNetMode::Generative;
    let mut net = RepNet::new(config, derive_seed_str(hyper.seed, "init"))?;
    let mut enc_adam = AdamState::new(&net.encoder);
    let mut head_adam = AdamState::new(net.decoder.as_ref().or(net.predictor.as_ref()).expect("head"));
    let mut trace = Vec::with_capacity(hyper.epochs);
    let mut order: Vec<usize> = (0..records.len()).collect();
    for epoch in 0..hyper.epochs {
        let mut rng = rng_from_seed(derive_seed(derive_seed_str(hyper.seed, "epochs"), epoch as u64));
        order.shuffle(&mut rng);
        let progress = if hyper.epochs > 1 { epoch as f64 / (hyper.epochs - 1) as f64 } else { 0.0 };
        let lr = hyper.lr * (1.0 - progress * (1.0 - hyper.final_lr_fraction));
        let mut total = 0.0;
        for (b, batch) in order.chunks(hyper.batch_states).enumerate() {
            let mut step = Step::new(&net);
            let w = 1.0 / batch.len() as f64;
            for &i in batch {
                let (ctx, q) = split(records[i].pairs.len(), hyper, need_queries, &mut rng)?;
                let noise = (hyper.context_noise_sigma2 > 0.0).then(|| (hyper.context_noise_sigma2, rng.random::<u64>()));
                let loss = step.accumulate(&records[i], &ctx, &q, noise, w)?;
                if !loss.is_finite() {
                    return Err(Error::numeric(format!("loss diverged at epoch {epoch}, batch {b}")));
                }
                total += loss;
            }
            let Step { mut enc_grads, mut head_grads, .. } = step;
            if let Some(cap) = hyper.grad_clip {
                clip_gradient_norm(&mut [&mut enc_grads, &mut head_grads], cap)?;
            }
            adam_step(&mut net.encoder, &enc_grads, &mut enc_adam, lr)
                .map_err(|e| Error::numeric(format!("epoch {epoch}: {e}")))?;
            let head = net.decoder.as_mut().or(net.predictor.as_mut()).expect("head");
            adam_step(head, &head_grads, &mut head_adam, lr)
                .map_err(|e| Error::numeric(format!("epoch {epoch}: {e}")))?;
        }
        trace.push(total / records.len() as f64);
    }
    Ok(TrainingRun { net, loss_trace: trace })
}

/// Trains encoder and decoder to reconstruct held-out measurement statistics
/// from the representation of a random context set (cross-entropy loss).
pub fn train_self_supervised(records: &[TrainingRecord], config: RepNetConfig, hyper: &RepNetHyper) -> Result<TrainingRun> {
    if config.mode != RepNetMode::Generative {
        return Err(Error::Contract("self-supervised training needs generative mode".into()));
    }
    train(records, config, hyper)
}

/// Trains encoder and predictor to regress the record labels (squared error).
pub fn train_supervised(records: &[TrainingRecord], config: RepNetConfig, hyper: &RepNetHyper) -> Result<TrainingRun> {
    if config.mode != RepNetMode::Property {
        return Err(Error::Contract("supervised training needs property mode".into()));
    }
    if records.iter().any(|r| r.label.is_none()) {
        return Err(Error::validation("every record needs a label for supervised training"));
    }
    train(records, config, hyper)
}

/// Mean total-variation distance between generated and true statistics of
/// query measurements, with contexts of `context_size` drawn per record.
pub fn evaluate_reconstruction(net: &RepNet, records: &[TrainingRecord], context_size: usize, seed: u64) -> Result<f64> {
    let hyper = RepNetHyper { context_size, queries_per_state: 0, ..RepNetHyper::default() };
    let mut rng = rng_from_seed(seed);
    let mut sum = 0.0;
    let mut count = 0usize;
    for rec in records {
        let (ctx, queries) = split(rec.pairs.len(), &hyper, true, &mut rng)?;
        let pairs: Vec<_> = ctx.iter().map(|&i| (&rec.pairs[i].0, &rec.pairs[i].1)).collect();
        let r: Representation = net.encode_refs(&pairs)?;
        for &q in &queries {
            sum += net.generate(&r, &rec.pairs[q].0)?.total_variation(&rec.pairs[q].1);
            count += 1;
        }
    }
    Ok(sum / count.max(1) as f64)
}
