use super::loss::ExpectileParams;
use crate::{Error, Result};

/// Absolute bracket width at which [`solve_expectile`] stops.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

/// `α·Σ_{x>t}(x − t) − β·Σ_{x<t}(t − x)`, strictly decreasing in `t`.
pub fn first_order_residual(samples: &[f64], t: f64, p: &ExpectileParams) -> f64 {
    let (mut above, mut below) = (0.0, 0.0);
    for &x in samples {
        if x > t {
            above += x - t;
        } else if x < t {
            below += t - x;
        }
    }
    p.alpha() * above - p.beta() * below
}

/// Minimizer of `Σ expectile_loss(t, xᵢ)` by bisection on the first-order
/// condition. The result lies in `[min(samples), max(samples)]`.
pub fn solve_expectile(samples: &[f64], p: &ExpectileParams) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Argument("cannot take the expectile of no samples".into()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Argument("samples must be finite".into()));
    }
    let mut lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    while hi - lo > SOLVER_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if first_order_residual(samples, mid, p) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
