//! Training environments.
//!
//! [`NavEnv`] wraps a [`NavWorld`] (corridor ring, cluttered room or a map
//! file) into an episodic task with an 18-dimensional normalized
//! observation and a two-dimensional action. [`PointMassEnv`] is a tiny
//! regulation task with a known optimal return, useful for smoke tests.

pub mod geometry;
pub mod map;
pub mod nav;
pub mod pointmass;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use geometry::{cast_rays, Point, Polygon, Segment};
pub use map::{format_map, load_map, parse_map, save_map, MAP_FORMAT, MAP_FORMAT_VERSION};
pub use nav::{
    nav_reward, NavState, NavWorld, Observation, Pose, StepInfo, StepResult, COLLISION_DISTANCE,
    COLLISION_REWARD, N_BEAMS, SPAWN_CLEARANCE,
};
pub use pointmass::{PointMass, PointMassConfig};

use crate::rng::SeedStream;
use crate::{Error, Result};

/// Names accepted by [`builtin_world`].
pub const BUILTIN_ENVS: [&str; 3] = ["corridor", "unstructured", "pointmass"];

/// Outcome of one environment step as seen by a learner.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// Episode over, for any reason.
    pub done: bool,
    /// Episode over because of a true terminal state (not the time limit).
    pub terminal: bool,
}

/// One row of a trajectory log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub w: f64,
    pub d_min: f64,
    pub reward: f64,
    pub done: bool,
}

pub trait Environment {
    fn name(&self) -> &str;
    fn observation_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn max_episode_steps(&self) -> usize;
    fn reset(&mut self, rng: &mut SeedStream) -> Result<Vec<f64>>;
    fn step(&mut self, action: &[f64]) -> Result<EnvStep>;

    /// Log row for the most recent step, if the environment has a pose.
    fn trajectory_row(&self, _reward: f64, _done: bool) -> Option<TrajectoryRow> {
        None
    }

    /// Best achievable return of the current episode, when known.
    fn optimal_return(&self) -> Option<f64> {
        None
    }
}

/// Navigation task built on a [`NavWorld`].
#[derive(Debug, Clone)]
pub struct NavEnv {
    world: NavWorld,
    state: Option<NavState>,
    last_d_min: f64,
    collided: bool,
}

impl NavEnv {
    pub fn new(world: NavWorld) -> Self {
        Self {
            world,
            state: None,
            last_d_min: f64::INFINITY,
            collided: false,
        }
    }

    pub fn world(&self) -> &NavWorld {
        &self.world
    }

    pub fn state(&self) -> Option<&NavState> {
        self.state.as_ref()
    }

    /// Raw step result, exposing the scan and termination details.
    pub fn step_raw(&mut self, action: &[f64]) -> Result<StepResult> {
        let state = self
            .state
            .as_ref()
            .ok_or_else(|| Error::State("step before reset".into()))?;
        let (next, result) = self.world.step(state, action)?;
        self.state = Some(next);
        self.last_d_min = result.info.d_min;
        self.collided = result.info.collision;
        Ok(result)
    }
}

impl Environment for NavEnv {
    fn name(&self) -> &str {
        &self.world.name
    }

    fn observation_dim(&self) -> usize {
        self.world.n_beams + 2
    }

    fn action_dim(&self) -> usize {
        2
    }

    fn max_episode_steps(&self) -> usize {
        self.world.max_steps()
    }

    /// Fresh uniform spawn, or the wall-parallel repositioning routine when
    /// the previous episode ended in a collision.
    fn reset(&mut self, rng: &mut SeedStream) -> Result<Vec<f64>> {
        let prev = self.state.filter(|_| self.collided);
        let (state, obs) = self.world.reset(rng, prev.as_ref())?;
        self.state = Some(state);
        self.last_d_min = obs.d_min();
        self.collided = false;
        Ok(obs.features(&self.world))
    }

    fn step(&mut self, action: &[f64]) -> Result<EnvStep> {
        let r = self.step_raw(action)?;
        Ok(EnvStep {
            observation: r.observation.features(&self.world),
            reward: r.reward,
            done: r.done,
            terminal: r.info.collision,
        })
    }

    fn trajectory_row(&self, reward: f64, done: bool) -> Option<TrajectoryRow> {
        self.state.map(|s| TrajectoryRow {
            t: s.elapsed,
            x: s.pose.x,
            y: s.pose.y,
            theta: s.pose.theta,
            v: s.v,
            w: s.w,
            d_min: self.last_d_min,
            reward,
            done,
        })
    }
}

/// Point-mass regulation task.
#[derive(Debug, Clone)]
pub struct PointMassEnv {
    inner: PointMass,
}

impl PointMassEnv {
    pub fn new(config: PointMassConfig) -> Result<Self> {
        Ok(Self {
            inner: PointMass::new(config)?,
        })
    }

    pub fn inner(&self) -> &PointMass {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut PointMass {
        &mut self.inner
    }
}

impl Environment for PointMassEnv {
    fn name(&self) -> &str {
        "pointmass"
    }

    fn observation_dim(&self) -> usize {
        2
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn max_episode_steps(&self) -> usize {
        self.inner.config().horizon
    }

    fn reset(&mut self, rng: &mut SeedStream) -> Result<Vec<f64>> {
        Ok(self.inner.reset(rng))
    }

    fn step(&mut self, action: &[f64]) -> Result<EnvStep> {
        let (observation, reward, done) = self.inner.step(action)?;
        Ok(EnvStep {
            observation,
            reward,
            done,
            terminal: false,
        })
    }

    fn trajectory_row(&self, reward: f64, done: bool) -> Option<TrajectoryRow> {
        let (p, v) = self.inner.state();
        Some(TrajectoryRow {
            t: self.inner.steps() as f64 * self.inner.config().dt,
            x: p,
            y: 0.0,
            theta: 0.0,
            v,
            w: 0.0,
            d_min: f64::INFINITY,
            reward,
            done,
        })
    }

    fn optimal_return(&self) -> Option<f64> {
        Some(self.inner.optimal_return())
    }
}

/// Any of the shipped environments.
#[derive(Debug, Clone)]
pub enum Env {
    Nav(NavEnv),
    PointMass(PointMassEnv),
}

macro_rules! dispatch {
    ($self:expr, $e:ident => $body:expr) => {
        match $self {
            Env::Nav($e) => $body,
            Env::PointMass($e) => $body,
        }
    };
}

impl Environment for Env {
    fn name(&self) -> &str {
        dispatch!(self, e => e.name())
    }

    fn observation_dim(&self) -> usize {
        dispatch!(self, e => e.observation_dim())
    }

    fn action_dim(&self) -> usize {
        dispatch!(self, e => e.action_dim())
    }

    fn max_episode_steps(&self) -> usize {
        dispatch!(self, e => e.max_episode_steps())
    }

    fn reset(&mut self, rng: &mut SeedStream) -> Result<Vec<f64>> {
        dispatch!(self, e => e.reset(rng))
    }

    fn step(&mut self, action: &[f64]) -> Result<EnvStep> {
        dispatch!(self, e => e.step(action))
    }

    fn trajectory_row(&self, reward: f64, done: bool) -> Option<TrajectoryRow> {
        dispatch!(self, e => e.trajectory_row(reward, done))
    }

    fn optimal_return(&self) -> Option<f64> {
        dispatch!(self, e => e.optimal_return())
    }
}

/// Rectangular ring: a 6 m × 4 m outer wall around a 4 m × 2 m island,
/// leaving a 1 m wide corridor. 17 s episodes.
pub fn corridor_world() -> NavWorld {
    NavWorld::new(
        "corridor",
        Polygon::rect(0.0, 0.0, 6.0, 4.0),
        vec![Polygon::rect(1.0, 1.0, 5.0, 3.0)],
        17.0,
    )
    .expect("built-in corridor is valid")
}

/// 10 m × 8 m room with seven box obstacles. 25 s episodes.
pub fn unstructured_world() -> NavWorld {
    let boxes = [
        (2.0, 1.5, 3.0, 2.5),
        (5.0, 1.0, 6.5, 1.8),
        (7.5, 3.0, 8.5, 4.5),
        (1.5, 5.0, 2.2, 6.5),
        (4.0, 4.0, 5.0, 5.0),
        (6.0, 6.0, 7.0, 7.0),
        (8.6, 6.2, 9.2, 7.2),
    ];
    NavWorld::new(
        "unstructured",
        Polygon::rect(0.0, 0.0, 10.0, 8.0),
        boxes
            .iter()
            .map(|&(x0, y0, x1, y1)| Polygon::rect(x0, y0, x1, y1))
            .collect(),
        25.0,
    )
    .expect("built-in room is valid")
}

/// Looks up a shipped environment by name.
pub fn builtin_world(name: &str) -> Result<Env> {
    match name {
        "corridor" => Ok(Env::Nav(NavEnv::new(corridor_world()))),
        "unstructured" => Ok(Env::Nav(NavEnv::new(unstructured_world()))),
        "pointmass" => Ok(Env::PointMass(PointMassEnv::new(PointMassConfig::default())?)),
        other => Err(Error::Argument(format!(
            "unknown environment {other:?}; expected one of {BUILTIN_ENVS:?} or a map file"
        ))),
    }
}

/// A built-in name, or a path to a map file.
pub fn make_env(spec: &str) -> Result<Env> {
    if BUILTIN_ENVS.contains(&spec) {
        return builtin_world(spec);
    }
    let path = Path::new(spec);
    if path.is_file() {
        return Ok(Env::Nav(NavEnv::new(load_map(path)?)));
    }
    builtin_world(spec)
}
