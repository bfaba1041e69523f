use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Identity,
    Softmax,
}

/// Affine layer `z = W a + b` with `W` of shape `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl Layer {
    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Self { weights: DMatrix::zeros(n_out, n_in), bias: DVector::zeros(n_out) }
    }

    pub fn n_in(&self) -> usize {
        self.weights.ncols()
    }

    pub fn n_out(&self) -> usize {
        self.weights.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Layer>,
    pub hidden: Activation,
    pub output: OutputActivation,
}

/// Gradients with the same layout as the network they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub layers: Vec<Layer>,
}

/// Post-activation values of every layer, input first.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    acts: Vec<DMatrix<f64>>,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.acts[0].ncols()
    }
}

/// Seeded initialization: weights uniform on `±√(3/fan_in)` (standard
/// deviation `1/√fan_in`), biases zero.
pub fn init_mlp(sizes: &[usize], hidden: Activation, output: OutputActivation, seed: u64) -> Result<Mlp> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::validation(format!("invalid layer sizes {sizes:?}")));
    }
    let mut rng = rng_from_seed(seed);
    let layers = sizes
        .windows(2)
        .map(|w| {
            let bound = (3.0 / w[0] as f64).sqrt();
            let weights = DMatrix::from_fn(w[1], w[0], |_, _| rng.random_range(-bound..=bound));
            Layer { weights, bias: DVector::zeros(w[1]) }
        })
        .collect();
    Ok(Mlp { layers, hidden, output })
}

impl Mlp {
    /// Builds a network from explicit layers, checking that shapes compose.
    pub fn from_layers(layers: Vec<Layer>, hidden: Activation, output: OutputActivation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::validation("network needs at least one layer"));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.bias.len() != l.n_out() {
                return Err(Error::validation(format!("layer {k}: bias length {} vs {} outputs", l.bias.len(), l.n_out())));
            }
            if k > 0 && layers[k - 1].n_out() != l.n_in() {
                return Err(Error::validation(format!("layer {k} input {} does not match previous output", l.n_in())));
            }
            if l.weights.iter().chain(l.bias.iter()).any(|v| !v.is_finite()) {
                return Err(Error::numeric(format!("layer {k} has non-finite parameters")));
            }
        }
        Ok(Self { layers, hidden, output })
    }

    pub fn n_in(&self) -> usize {
        self.layers[0].n_in()
    }

    pub fn n_out(&self) -> usize {
        self.layers.last().expect("nonempty").n_out()
    }

    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.n_in()).chain(self.layers.iter().map(Layer::n_out)).collect()
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn zero_grads(&self) -> MlpGrads {
        MlpGrads { layers: self.layers.iter().map(|l| Layer::zeros(l.n_in(), l.n_out())).collect() }
    }

    /// Forward pass over a batch whose columns are samples.
    pub fn forward_batch(&self, x: &DMatrix<f64>) -> Result<(DMatrix<f64>, ForwardCache)> {
        if x.nrows() != self.n_in() {
            return Err(Error::validation(format!("input has {} rows, network expects {}", x.nrows(), self.n_in())));
        }
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.clone());
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = &layer.weights * &acts[k];
            for mut col in z.column_iter_mut() {
                col += &layer.bias;
            }
            if k < last {
                if self.hidden == Activation::Tanh {
                    z.apply(|v| *v = v.tanh());
                }
            } else if self.output == OutputActivation::Softmax {
                for mut col in z.column_iter_mut() {
                    let m = col.max();
                    col.apply(|v| *v = (*v - m).exp());
                    let s = col.sum();
                    col /= s;
                }
            }
            acts.push(z);
        }
        let out = acts.last().expect("nonempty").clone();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("non-finite network output"));
        }
        Ok((out, ForwardCache { acts }))
    }

    /// Inference without keeping intermediate activations.
    pub fn predict_batch(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.forward_batch(x).map(|(y, _)| y)
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        let (y, cache) = self.forward_batch(&DMatrix::from_column_slice(input.len(), 1, input))?;
        Ok((y.as_slice().to_vec(), cache))
    }

    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.forward(input).map(|(y, _)| y)
    }

    /// Reverse pass. `output_grad` is `∂L/∂y` per column; the returned
    /// gradients are summed over the batch, together with `∂L/∂x`.
    pub fn backward_batch(&self, cache: &ForwardCache, output_grad: &DMatrix<f64>) -> Result<(MlpGrads, DMatrix<f64>)> {
        let mut grads = self.zero_grads();
        let dx = self.backward_into(cache, output_grad, &mut grads)?;
        Ok((grads, dx))
    }

    /// As [`Mlp::backward_batch`] but accumulates into `grads`.
    pub fn backward_into(&self, cache: &ForwardCache, output_grad: &DMatrix<f64>, grads: &mut MlpGrads) -> Result<DMatrix<f64>> {
        let y = cache.acts.last().expect("nonempty");
        if cache.acts.len() != self.layers.len() + 1 || output_grad.shape() != y.shape() {
            return Err(Error::validation(format!(
                "output gradient shape {:?} does not match cached output {:?}",
                output_grad.shape(),
                y.shape()
            )));
        }
        if grads.layers.len() != self.layers.len() {
            return Err(Error::validation("gradient buffer does not match network"));
        }
        let mut delta = output_grad.clone();
        if self.output == OutputActivation::Softmax {
            for (mut d, yc) in delta.column_iter_mut().zip(y.column_iter()) {
                let dot = d.dot(&yc);
                d.zip_apply(&yc, |g, p| *g = p * (*g - dot));
            }
        }
        for k in (0..self.layers.len()).rev() {
            let a = &cache.acts[k];
            let g = &mut grads.layers[k];
            g.weights.gemm(1.0, &delta, &a.transpose(), 1.0);
            for col in delta.column_iter() {
                g.bias += col;
            }
            let mut da = self.layers[k].weights.transpose() * &delta;
            if k > 0 && self.hidden == Activation::Tanh {
                da.zip_apply(a, |g, h| *g *= 1.0 - h * h);
            }
            delta = da;
        }
        Ok(delta)
    }

    pub fn backward(&self, cache: &ForwardCache, output_grad: &[f64]) -> Result<(MlpGrads, Vec<f64>)> {
        let g = DMatrix::from_column_slice(output_grad.len(), 1, output_grad);
        let (grads, dx) = self.backward_batch(cache, &g)?;
        Ok((grads, dx.as_slice().to_vec()))
    }

    /// Parameters as contiguous slices in a fixed order (per layer: weights,
    /// then bias).
    pub fn param_slices(&self) -> impl Iterator<Item = &[f64]> {
        self.layers.iter().flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
    }

    pub fn param_slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers.iter_mut().flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.param_slices().flatten().copied().collect()
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::validation(format!("expected {} parameters, got {}", self.n_params(), flat.len())));
        }
        let mut off = 0;
        for s in self.param_slices_mut() {
            s.copy_from_slice(&flat[off..off + s.len()]);
            off += s.len();
        }
        Ok(())
    }
}

impl MlpGrads {
    pub fn slices(&self) -> impl Iterator<Item = &[f64]> {
        self.layers.iter().flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
    }

    pub fn slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers.iter_mut().flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.slices().flatten().copied().collect()
    }

    pub fn scale(&mut self, s: f64) {
        for sl in self.slices_mut() {
            sl.iter_mut().for_each(|v| *v *= s);
        }
    }

    pub fn fill_zero(&mut self) {
        for sl in self.slices_mut() {
            sl.fill(0.0);
        }
    }
}
