use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The `(α, β)` pair weighting residuals above and below the target.
///
/// `α` weights predictions that fall short of the target, `β` the rest.
/// The normalizer `Z = max(α, β)` is always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ExpectileParams {
    alpha: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawParams> for ExpectileParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        ExpectileParams::new(raw.alpha, raw.beta)
    }
}

impl From<ExpectileParams> for RawParams {
    fn from(p: ExpectileParams) -> Self {
        RawParams {
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

impl ExpectileParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0) {
            return Err(Error::Argument(format!(
                "expectile weights must be finite and positive, got alpha={alpha} beta={beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// `α = β = 1`: the plain squared error.
    pub fn symmetric() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn normalizer(&self) -> f64 {
        self.alpha.max(self.beta)
    }

    pub fn is_symmetric(&self) -> bool {
        self.alpha == self.beta
    }

    /// Normalized weight applied to the residual of `pred` against `target`.
    #[inline]
    pub fn weight(&self, pred: f64, target: f64) -> f64 {
        let w = if pred < target { self.alpha } else { self.beta };
        w / self.normalizer()
    }
}

impl Default for ExpectileParams {
    /// `α = 1, β = 2`.
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 2.0,
        }
    }
}

/// Asymmetric squared loss of `pred` against `target`.
#[inline]
pub fn expectile_loss(pred: f64, target: f64, p: &ExpectileParams) -> f64 {
    let r = target - pred;
    p.weight(pred, target) * r * r
}

/// Derivative of [`expectile_loss`] with respect to `pred`; zero at the kink.
#[inline]
pub fn expectile_loss_grad(pred: f64, target: f64, p: &ExpectileParams) -> f64 {
    p.weight(pred, target) * 2.0 * (pred - target)
}

/// Equivalent single-parameter expectile level `τ = α / (α + β)`.
pub fn tau_of(p: &ExpectileParams) -> f64 {
    p.alpha / (p.alpha + p.beta)
}
