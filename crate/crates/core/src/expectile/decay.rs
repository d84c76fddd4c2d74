use serde::{Deserialize, Serialize};

use super::loss::ExpectileParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayKind {
    /// Fixed `(α, β)`.
    None,
    /// Gap fraction `min(1, rate · t)`.
    LinearGap,
    /// Gap fraction `1 − (1 − rate)^t`.
    ExponentialGap,
}

/// Schedule closing the gap between `α` and `β` over time.
///
/// Convergence to the unbiased loss requires the gap fraction to reach 1,
/// which both non-trivial kinds do for any `rate > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySchedule {
    pub kind: DecayKind,
    pub rate: f64,
    /// Apply at episode boundaries (`true`) or after every training step.
    pub per_episode: bool,
}

impl Default for DecaySchedule {
    fn default() -> Self {
        Self::none()
    }
}

impl DecaySchedule {
    pub fn none() -> Self {
        Self {
            kind: DecayKind::None,
            rate: 0.0,
            per_episode: true,
        }
    }

    pub fn linear(rate: f64) -> Self {
        Self {
            kind: DecayKind::LinearGap,
            rate: rate.clamp(0.0, 1.0),
            per_episode: true,
        }
    }

    pub fn exponential(rate: f64) -> Self {
        Self {
            kind: DecayKind::ExponentialGap,
            rate: rate.clamp(0.0, 1.0),
            per_episode: true,
        }
    }
}

/// Fraction of the current gap closed at tick `t` (1-based).
pub fn gap_fraction(schedule: &DecaySchedule, t: u64) -> f64 {
    if t == 0 {
        return 0.0;
    }
    let rate = schedule.rate.clamp(0.0, 1.0);
    match schedule.kind {
        DecayKind::None => 0.0,
        DecayKind::LinearGap => (rate * t as f64).min(1.0),
        DecayKind::ExponentialGap => 1.0 - (1.0 - rate).powf(t as f64),
    }
}

/// Moves the smaller of `(α, β)` toward the larger by the scheduled fraction
/// of the current gap. The two never cross.
pub fn decay_step(p: &ExpectileParams, schedule: &DecaySchedule, tick: u64) -> ExpectileParams {
    let g = gap_fraction(schedule, tick);
    if g <= 0.0 || p.is_symmetric() {
        return *p;
    }
    let (a, b) = (p.alpha(), p.beta());
    let gap = (a - b).abs();
    let hi = a.max(b);
    let raised = (a.min(b) + gap * g).min(hi);
    let (a, b) = if a < b { (raised, b) } else { (a, raised) };
    ExpectileParams::new(a, b).expect("raising the smaller positive weight keeps both positive")
}
