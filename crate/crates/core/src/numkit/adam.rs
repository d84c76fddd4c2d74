//! Adam with bias correction.

use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, MlpGradient};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment accumulators for one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub config: AdamConfig,
    pub first: MlpGradient,
    pub second: MlpGradient,
    pub step: u64,
}

impl AdamState {
    pub fn new(net: &Mlp) -> Self {
        Self::with_config(net, AdamConfig::default())
    }

    pub fn with_config(net: &Mlp, config: AdamConfig) -> Self {
        Self {
            config,
            first: MlpGradient::zeros_like(net),
            second: MlpGradient::zeros_like(net),
            step: 0,
        }
    }

    /// One descent step on `params` along `grads`.
    ///
    /// Non-finite gradients are rejected before anything is modified.
    pub fn step(&mut self, params: &mut Mlp, grads: &MlpGradient, lr: f64) -> Result<()> {
        if !grads.congruent_with(params)
            || !self.first.congruent_with(params)
            || !self.second.congruent_with(params)
        {
            return Err(Error::Shape("adam state, gradient and params differ in shape".into()));
        }
        if !grads.is_finite() {
            return Err(Error::Numeric("non-finite gradient passed to adam".into()));
        }
        self.step += 1;
        let AdamConfig { beta1, beta2, eps } = self.config;
        let t = self.step as i32;
        let correct1 = 1.0 - beta1.powi(t);
        let correct2 = 1.0 - beta2.powi(t);
        for (layer, ((g, m), v)) in params.layers_mut().iter_mut().zip(
            grads
                .layers
                .iter()
                .zip(self.first.layers.iter_mut())
                .zip(self.second.layers.iter_mut()),
        ) {
            update_slice(
                layer.weight.data_mut(),
                g.weight.data(),
                m.weight.data_mut(),
                v.weight.data_mut(),
                (beta1, beta2, eps, correct1, correct2, lr),
            );
            update_slice(
                &mut layer.bias,
                &g.bias,
                &mut m.bias,
                &mut v.bias,
                (beta1, beta2, eps, correct1, correct2, lr),
            );
        }
        Ok(())
    }
}

#[inline]
fn update_slice(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    (beta1, beta2, eps, correct1, correct2, lr): (f64, f64, f64, f64, f64, f64),
) {
    for i in 0..p.len() {
        let gi = g[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
        let m_hat = m[i] / correct1;
        let v_hat = v[i] / correct2;
        p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// Free-function form of [`AdamState::step`].
pub fn adam_step(params: &mut Mlp, grads: &MlpGradient, state: &mut AdamState, lr: f64) -> Result<()> {
    state.step(params, grads, lr)
}
