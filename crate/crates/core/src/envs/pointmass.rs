//! One-dimensional double integrator driven to the origin under a quadratic cost.
//!
//! State `(p, v)`, control `u ∈ [-1, 1]`, exact zero-order-hold dynamics
//! `p ← p + v·dt + u·dt²/2`, `v ← v + u·dt`. The reward is
//! `-(q_p·p² + q_v·v² + ρ·u²)` on the pre-step state. Because the initial
//! states are small enough for the unconstrained finite-horizon LQR law to
//! stay inside the action bounds, `-x₀ᵀ P₀ x₀` is the exact optimal return.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMassConfig {
    pub dt: f64,
    pub horizon: usize,
    pub q_position: f64,
    pub q_velocity: f64,
    pub rho: f64,
    /// Initial position is uniform in `[-p0_range, p0_range]`.
    pub p0_range: f64,
    /// Initial velocity is uniform in `[-v0_range, v0_range]`; zero starts at rest.
    pub v0_range: f64,
}

impl Default for PointMassConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            horizon: 30,
            q_position: 1.0,
            q_velocity: 0.1,
            rho: 1.0,
            p0_range: 1.0,
            v0_range: 0.0,
        }
    }
}

type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct PointMass {
    config: PointMassConfig,
    p: f64,
    v: f64,
    steps: usize,
    initial: (f64, f64),
    riccati: Vec<Mat2>,
}

impl PointMass {
    pub fn new(config: PointMassConfig) -> Result<Self> {
        let c = &config;
        let positive = [c.dt, c.rho, c.p0_range];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0))
            || !(c.v0_range.is_finite() && c.v0_range >= 0.0)
            || !(c.q_position >= 0.0 && c.q_velocity >= 0.0)
            || c.horizon == 0
        {
            return Err(Error::Config("invalid point-mass configuration".into()));
        }
        Ok(Self {
            riccati: riccati(&config),
            config,
            p: 0.0,
            v: 0.0,
            steps: 0,
            initial: (0.0, 0.0),
        })
    }

    pub fn config(&self) -> &PointMassConfig {
        &self.config
    }

    pub fn state(&self) -> (f64, f64) {
        (self.p, self.v)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn observation(&self) -> Vec<f64> {
        vec![self.p, self.v]
    }

    pub fn reset_to(&mut self, p: f64, v: f64) -> Vec<f64> {
        self.p = p;
        self.v = v;
        self.steps = 0;
        self.initial = (p, v);
        self.observation()
    }

    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        let c = self.config;
        let p = rng.random_range(-c.p0_range..=c.p0_range);
        let v = rng.random_range(-c.v0_range..=c.v0_range);
        self.reset_to(p, v)
    }

    /// Returns `(observation, reward, done)`.
    pub fn step(&mut self, action: &[f64]) -> Result<(Vec<f64>, f64, bool)> {
        if action.len() != 1 || !action[0].is_finite() {
            return Err(Error::Argument("point-mass action is one finite value".into()));
        }
        let u = action[0].clamp(-1.0, 1.0);
        let c = &self.config;
        let reward = -(c.q_position * self.p * self.p + c.q_velocity * self.v * self.v + c.rho * u * u);
        self.p += self.v * c.dt + 0.5 * u * c.dt * c.dt;
        self.v += u * c.dt;
        self.steps += 1;
        Ok((self.observation(), reward, self.steps >= c.horizon))
    }

    /// Cost-to-go matrices `P_t`, `t = 0..=horizon`, with `P_horizon = 0`.
    pub fn cost_to_go(&self) -> &[Mat2] {
        &self.riccati
    }

    /// Optimal unconstrained feedback `u_t = -K_t x` at step `t`.
    pub fn lqr_gain(&self, t: usize) -> [f64; 2] {
        gain(&self.config, &self.riccati[t + 1])
    }

    /// Optimal return from `(p, v)` over the full horizon.
    pub fn optimal_return_from(&self, p: f64, v: f64) -> f64 {
        let m = &self.riccati[0];
        -(p * (m[0][0] * p + m[0][1] * v) + v * (m[1][0] * p + m[1][1] * v))
    }

    /// Optimal return of the episode started by the last reset.
    pub fn optimal_return(&self) -> f64 {
        self.optimal_return_from(self.initial.0, self.initial.1)
    }
}

fn dynamics(c: &PointMassConfig) -> (Mat2, [f64; 2]) {
    ([[1.0, c.dt], [0.0, 1.0]], [0.5 * c.dt * c.dt, c.dt])
}

fn gain(c: &PointMassConfig, next: &Mat2) -> [f64; 2] {
    let (a, b) = dynamics(c);
    // Bᵀ P
    let bp = [
        b[0] * next[0][0] + b[1] * next[1][0],
        b[0] * next[0][1] + b[1] * next[1][1],
    ];
    let denom = c.rho + bp[0] * b[0] + bp[1] * b[1];
    [
        (bp[0] * a[0][0] + bp[1] * a[1][0]) / denom,
        (bp[0] * a[0][1] + bp[1] * a[1][1]) / denom,
    ]
}

fn riccati(c: &PointMassConfig) -> Vec<Mat2> {
    let (a, b) = dynamics(c);
    let mut out = vec![[[0.0; 2]; 2]; c.horizon + 1];
    for t in (0..c.horizon).rev() {
        let p = out[t + 1];
        let k = gain(c, &p);
        // Closed loop A - B K.
        let cl = [
            [a[0][0] - b[0] * k[0], a[0][1] - b[0] * k[1]],
            [a[1][0] - b[1] * k[0], a[1][1] - b[1] * k[1]],
        ];
        let mut m = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for r in 0..2 {
                    for q in 0..2 {
                        s += cl[r][i] * p[r][q] * cl[q][j];
                    }
                }
                m[i][j] = s + c.rho * k[i] * k[j];
            }
        }
        m[0][0] += c.q_position;
        m[1][1] += c.q_velocity;
        out[t] = m;
    }
    out
}
