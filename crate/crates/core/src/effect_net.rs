//! The effect network: a small MLP that maps the non-susceptible
//! compartments (as population fractions) to a multiplier in (0, 1) applied
//! to the base infection rate.
//!
//! Hidden layers use ELU, the single output unit uses a sigmoid, so the
//! effective rate `beta_star * eff` can dampen but never exceed or negate
//! the base rate. Forward passes record enough state for an exact reverse
//! pass; both are plain loops over row-major weight matrices, which keeps
//! the arithmetic bit-reproducible across runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::compartments::ModelVariant;
use crate::error::{Error, Result};

/// Exponential linear unit.
#[inline]
pub(crate) fn elu(x: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        x.exp() - 1.0
    }
}

#[inline]
fn elu_derivative(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        x.exp()
    }
}

/// Numerically stable logistic sigmoid.
#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// One dense layer; `weights` is row-major with `out_dim` rows of `in_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    fn affine(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for j in 0..self.out_dim {
            let row = &self.weights[j * self.in_dim..(j + 1) * self.in_dim];
            let mut acc = self.biases[j];
            for (w, x) in row.iter().zip(input) {
                acc += w * x;
            }
            out.push(acc);
        }
    }
}

/// Per-layer values saved by [`EffectNetwork::forward`] for the reverse pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    /// `inputs[l]` is the input fed to layer `l`; `inputs[0]` is the network
    /// input itself.
    inputs: Vec<Vec<f64>>,
    /// `pre_activations[l]` is `W_l inputs[l] + b_l` before the nonlinearity.
    pre_activations: Vec<Vec<f64>>,
    /// The sigmoid output.
    pub eff: f64,
}

/// Gradients with the same shape as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGradients {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl NetworkGradients {
    pub fn zeros_like(net: &EffectNetwork) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &NetworkGradients) {
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in w.iter_mut().zip(ow) {
                *x += y;
            }
            for (x, y) in b.iter_mut().zip(ob) {
                *x += y;
            }
        }
    }

    /// Parameters flattened layer by layer, weights row-major then biases —
    /// the same canonical order as [`EffectNetwork::params_flat`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in &self.layers {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }
}

/// A fully connected network with ELU hidden layers and one sigmoid output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectNetwork {
    pub layers: Vec<DenseLayer>,
}

impl EffectNetwork {
    /// Random network for `variant` with the given hidden widths.
    ///
    /// Weights are drawn from N(0, 0.01²) layer by layer in row-major order
    /// from a ChaCha8 stream seeded with `seed`; every bias starts at 0.5.
    /// The draw order is part of the crate's reproducibility contract.
    pub fn new(variant: ModelVariant, hidden: &[usize], seed: u64) -> Result<Self> {
        Self::with_input_dim(variant.effect_input_dim(), hidden, seed)
    }

    /// As [`EffectNetwork::new`] but with an explicit input width.
    pub fn with_input_dim(input_dim: usize, hidden: &[usize], seed: u64) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::NetworkShape("input dimension must be positive".into()));
        }
        if hidden.iter().any(|&h| h == 0) {
            return Err(Error::NetworkShape(format!(
                "hidden layer widths must be positive, got {hidden:?}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 0.01).expect("valid std");
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(1);
        let layers = dims
            .windows(2)
            .map(|w| {
                let (in_dim, out_dim) = (w[0], w[1]);
                let weights = (0..in_dim * out_dim)
                    .map(|_| normal.sample(&mut rng))
                    .collect();
                DenseLayer {
                    in_dim,
                    out_dim,
                    weights,
                    biases: vec![0.5; out_dim],
                }
            })
            .collect();
        Ok(Self { layers })
    }

    /// Builds a network from explicit layers, checking the shapes chain.
    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::NetworkShape("network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.in_dim * l.out_dim || l.biases.len() != l.out_dim {
                return Err(Error::NetworkShape(format!(
                    "layer {i}: weights {} biases {} do not match {}x{}",
                    l.weights.len(),
                    l.biases.len(),
                    l.out_dim,
                    l.in_dim
                )));
            }
            if i + 1 < layers.len() && layers[i + 1].in_dim != l.out_dim {
                return Err(Error::NetworkShape(format!(
                    "layer {} input {} does not match layer {i} output {}",
                    i + 1,
                    layers[i + 1].in_dim,
                    l.out_dim
                )));
            }
        }
        if layers.last().unwrap().out_dim != 1 {
            return Err(Error::NetworkShape("output layer must have width 1".into()));
        }
        Ok(Self { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    /// Hidden layer widths (everything but the output layer).
    pub fn hidden_dims(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.out_dim)
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Parameters flattened in the canonical order (layer by layer, weights
    /// row-major, then biases).
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    /// Overwrites the parameters from a flat vector in canonical order.
    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::NetworkShape(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut offset = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&flat[offset..offset + nw]);
            offset += nw;
            let nb = l.biases.len();
            l.biases.copy_from_slice(&flat[offset..offset + nb]);
            offset += nb;
        }
        Ok(())
    }

    /// Runs the network and records the values needed by [`Self::backward`].
    pub fn forward(&self, input: &[f64]) -> Result<ForwardCache> {
        if input.len() != self.input_dim() {
            return Err(Error::InputDimensionMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let n_layers = self.layers.len();
        let mut inputs = Vec::with_capacity(n_layers);
        let mut pre_activations = Vec::with_capacity(n_layers);
        let mut current = input.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut pre = Vec::new();
            layer.affine(&current, &mut pre);
            inputs.push(std::mem::take(&mut current));
            if i + 1 < n_layers {
                current = pre.iter().map(|&a| elu(a)).collect();
            }
            pre_activations.push(pre);
        }
        let eff = sigmoid(pre_activations[n_layers - 1][0]);
        Ok(ForwardCache {
            inputs,
            pre_activations,
            eff,
        })
    }

    /// The multiplier alone, when no reverse pass will follow.
    pub fn eff(&self, input: &[f64]) -> Result<f64> {
        Ok(self.forward(input)?.eff)
    }

    /// Reverse pass. `upstream` is dL/dEff; returns parameter gradients and
    /// the gradient with respect to the network input.
    pub fn backward(&self, cache: &ForwardCache, upstream: f64) -> (NetworkGradients, Vec<f64>) {
        let mut grads = NetworkGradients::zeros_like(self);
        let last = self.layers.len() - 1;
        // d/d(pre-activation) of the output unit through the sigmoid.
        let mut d_pre = vec![upstream * cache.eff * (1.0 - cache.eff)];
        for l in (0..=last).rev() {
            let layer = &self.layers[l];
            let input = &cache.inputs[l];
            let (dw, db) = &mut grads.layers[l];
            let mut d_input = vec![0.0; layer.in_dim];
            for j in 0..layer.out_dim {
                let g = d_pre[j];
                db[j] += g;
                let row = &layer.weights[j * layer.in_dim..(j + 1) * layer.in_dim];
                let drow = &mut dw[j * layer.in_dim..(j + 1) * layer.in_dim];
                for k in 0..layer.in_dim {
                    drow[k] += g * input[k];
                    d_input[k] += g * row[k];
                }
            }
            if l == 0 {
                return (grads, d_input);
            }
            // Chain through the ELU of the previous layer.
            let prev_pre = &cache.pre_activations[l - 1];
            d_pre = d_input
                .iter()
                .zip(prev_pre)
                .map(|(&d, &a)| d * elu_derivative(a))
                .collect();
        }
        unreachable!("loop always returns at l == 0")
    }
}

/// Fills `buf` with the network input for a state: every compartment except
/// S, divided by the population. Shared by the integrator and the gradient
/// code so both see bit-identical inputs.
pub(crate) fn effect_input_into(
    variant: ModelVariant,
    z: &[f64],
    population: f64,
    buf: &mut Vec<f64>,
) {
    buf.clear();
    for i in variant.effect_input_indices() {
        buf.push(z[i] / population);
    }
}

/// The effect-network input for a state (all non-S compartments over N).
pub fn effect_input(variant: ModelVariant, z: &[f64], population: f64) -> Vec<f64> {
    let mut buf = Vec::with_capacity(variant.effect_input_dim());
    effect_input_into(variant, z, population, &mut buf);
    buf
}
