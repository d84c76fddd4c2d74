//! Fully connected feed-forward networks with exact batched gradients.
//!
//! Layer `i` computes `post = act(pre)`, `pre = input · W + b`, with `W`
//! stored as an `in × out` matrix so a batch of row vectors flows left to right.

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{gemm, Matrix};
use crate::{Error, Result};

/// Bytes used to store one parameter value.
pub const BYTES_PER_VALUE: usize = std::mem::size_of::<f64>();

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }
}

/// Weight (`in × out`) and bias (`out`) of one dense layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weight: Matrix::zeros(inputs, outputs),
            bias: vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weight.cols()
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.weight.data().iter().chain(self.bias.iter())
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weight.data_mut().iter_mut().chain(self.bias.iter_mut())
    }
}

/// Network parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Layer>,
    activations: Vec<Activation>,
}

/// Gradient of a scalar with respect to every parameter of an [`Mlp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpGradient {
    pub layers: Vec<Layer>,
}

/// Activations recorded by [`Mlp::forward`] for one backward pass.
///
/// Only post-activations are kept: every supported activation has a
/// derivative expressible through its output.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    inputs: Matrix,
    post: Vec<Matrix>,
}

impl ForwardCache {
    pub fn batch(&self) -> usize {
        self.inputs.rows()
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn post_activations(&self) -> &[Matrix] {
        &self.post
    }
}

impl Mlp {
    /// Uniform `[-1/√fan_in, 1/√fan_in]` weights, zero biases.
    pub fn new(layer_sizes: &[usize], activations: &[Activation], seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Config(
                "an mlp needs at least an input and an output size".into(),
            ));
        }
        if activations.len() != layer_sizes.len() - 1 {
            return Err(Error::Config(format!(
                "{} layer sizes need {} activations, got {}",
                layer_sizes.len(),
                layer_sizes.len() - 1,
                activations.len()
            )));
        }
        if let Some(bad) = layer_sizes.iter().position(|&n| n == 0) {
            return Err(Error::Config(format!("layer size {bad} is zero")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = layer_sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = 1.0 / (fan_in as f64).sqrt();
                let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
                let mut layer = Layer::zeros(fan_in, fan_out);
                for v in layer.weight.data_mut() {
                    *v = dist.sample(&mut rng);
                }
                layer
            })
            .collect();
        Ok(Self {
            layers,
            activations: activations.to_vec(),
        })
    }

    /// Assembles a network from explicit layers, checking width continuity.
    pub fn from_layers(layers: Vec<Layer>, activations: Vec<Activation>) -> Result<Self> {
        let net = Self {
            layers,
            activations,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() || self.layers.len() != self.activations.len() {
            return Err(Error::Shape(format!(
                "{} layers with {} activations",
                self.layers.len(),
                self.activations.len()
            )));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.bias.len() != layer.outputs() || layer.inputs() == 0 || layer.outputs() == 0 {
                return Err(Error::Shape(format!("layer {i} has inconsistent shapes")));
            }
            if i > 0 && self.layers[i - 1].outputs() != layer.inputs() {
                return Err(Error::Shape(format!(
                    "layer {i} expects {} inputs but layer {} emits {}",
                    layer.inputs(),
                    i - 1,
                    self.layers[i - 1].outputs()
                )));
            }
        }
        Ok(())
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_width()];
        sizes.extend(self.layers.iter().map(Layer::outputs));
        sizes
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.data().len() + l.bias.len())
            .sum()
    }

    /// Exact bytes held by the parameter values.
    pub fn param_bytes(&self) -> usize {
        self.param_count() * BYTES_PER_VALUE
    }

    /// All parameters, layer by layer (weights row-major, then bias).
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.values().copied()).collect()
    }

    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "{} values for {} parameters",
                values.len(),
                self.param_count()
            )));
        }
        let slots = self.layers.iter_mut().flat_map(Layer::values_mut);
        for (slot, v) in slots.zip(values) {
            *slot = *v;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }

    fn check_input(&self, inputs: &Matrix) -> Result<()> {
        if inputs.cols() != self.input_width() {
            return Err(Error::Shape(format!(
                "network expects {} input columns, got {}",
                self.input_width(),
                inputs.cols()
            )));
        }
        Ok(())
    }

    fn affine(layer: &Layer, input: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(input.rows(), layer.outputs());
        for r in 0..input.rows() {
            out.row_mut(r).copy_from_slice(&layer.bias);
        }
        gemm(1.0, input, false, &layer.weight, false, 1.0, &mut out);
        out
    }

    /// Batched forward pass keeping everything needed by [`Mlp::backward`].
    pub fn forward(&self, inputs: &Matrix) -> Result<(Matrix, ForwardCache)> {
        self.check_input(inputs)?;
        let mut post: Vec<Matrix> = Vec::with_capacity(self.layers.len());
        for (i, (layer, act)) in self.layers.iter().zip(&self.activations).enumerate() {
            let input = if i == 0 { inputs } else { &post[i - 1] };
            let mut y = Self::affine(layer, input);
            if *act != Activation::Identity {
                y.map_inplace(|v| act.apply(v));
            }
            post.push(y);
        }
        let outputs = post.last().expect("at least one layer").clone();
        Ok((
            outputs,
            ForwardCache {
                inputs: inputs.clone(),
                post,
            },
        ))
    }

    /// Forward pass without a cache.
    pub fn predict(&self, inputs: &Matrix) -> Result<Matrix> {
        self.check_input(inputs)?;
        let mut current: Option<Matrix> = None;
        for (layer, act) in self.layers.iter().zip(&self.activations) {
            let mut z = Self::affine(layer, current.as_ref().unwrap_or(inputs));
            if *act != Activation::Identity {
                z.map_inplace(|v| act.apply(v));
            }
            current = Some(z);
        }
        Ok(current.expect("at least one layer"))
    }

    /// Reverse pass for the scalar `⟨output_grad, outputs⟩`.
    ///
    /// Returns the parameter gradient and the gradient with respect to the
    /// network inputs.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        output_grad: &Matrix,
    ) -> Result<(MlpGradient, Matrix)> {
        if cache.post.len() != self.layers.len() || cache.inputs.cols() != self.input_width() {
            return Err(Error::Shape("forward cache does not match network".into()));
        }
        for (i, (z, layer)) in cache.post.iter().zip(&self.layers).enumerate() {
            if z.cols() != layer.outputs() || z.rows() != cache.batch() {
                return Err(Error::Shape(format!("cached layer {i} has the wrong shape")));
            }
        }
        if output_grad.shape() != (cache.batch(), self.output_width()) {
            return Err(Error::Shape(format!(
                "output gradient is {}x{}, outputs are {}x{}",
                output_grad.rows(),
                output_grad.cols(),
                cache.batch(),
                self.output_width()
            )));
        }

        let mut grads: Vec<Layer> = Vec::with_capacity(self.layers.len());
        let mut upstream = output_grad.clone();
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let mut delta = upstream;
            match self.activations[i] {
                Activation::Identity => {}
                Activation::Relu => {
                    for (d, y) in delta.data_mut().iter_mut().zip(cache.post[i].data()) {
                        *d = if *y > 0.0 { *d } else { 0.0 };
                    }
                }
                Activation::Tanh => {
                    for (d, y) in delta.data_mut().iter_mut().zip(cache.post[i].data()) {
                        *d *= 1.0 - y * y;
                    }
                }
            }
            let input = if i == 0 { &cache.inputs } else { &cache.post[i - 1] };
            let mut grad = Layer::zeros(layer.inputs(), layer.outputs());
            gemm(1.0, input, true, &delta, false, 0.0, &mut grad.weight);
            for r in 0..delta.rows() {
                for (b, d) in grad.bias.iter_mut().zip(delta.row(r)) {
                    *b += d;
                }
            }
            let mut down = Matrix::zeros(delta.rows(), layer.inputs());
            gemm(1.0, &delta, false, &layer.weight, true, 0.0, &mut down);
            grads.push(grad);
            upstream = down;
        }
        grads.reverse();
        Ok((MlpGradient { layers: grads }, upstream))
    }

    /// Polyak averaging `self ← tau · online + (1 − tau) · self`.
    pub fn soft_update_from(&mut self, online: &Mlp, tau: f64) -> Result<()> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::Argument(format!("tau {tau} outside (0, 1]")));
        }
        if !self.same_shape(online) {
            return Err(Error::Shape("soft update between different shapes".into()));
        }
        if tau == 1.0 {
            self.layers.clone_from(&online.layers);
            return Ok(());
        }
        for (t, o) in self.layers.iter_mut().zip(&online.layers) {
            for (tv, ov) in t.values_mut().zip(o.values()) {
                *tv = tau * ov + (1.0 - tau) * *tv;
            }
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &Mlp) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.weight.shape() == b.weight.shape() && a.bias.len() == b.bias.len())
    }
}

/// Free-function form of [`Mlp::soft_update_from`].
pub fn soft_update(target: &mut Mlp, online: &Mlp, tau: f64) -> Result<()> {
    target.soft_update_from(online, tau)
}

impl MlpGradient {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| Layer::zeros(l.inputs(), l.outputs()))
                .collect(),
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.values().copied()).collect()
    }

    pub fn congruent_with(&self, net: &Mlp) -> bool {
        self.layers.len() == net.layers.len()
            && self
                .layers
                .iter()
                .zip(&net.layers)
                .all(|(a, b)| a.weight.shape() == b.weight.shape() && a.bias.len() == b.bias.len())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }

    pub(crate) fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.values())
    }

    pub(crate) fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.values_mut())
    }

    /// Adds `other` element-wise.
    pub fn accumulate(&mut self, other: &MlpGradient) {
        for (a, b) in self.values_mut().zip(other.values()) {
            *a += b;
        }
    }
}
