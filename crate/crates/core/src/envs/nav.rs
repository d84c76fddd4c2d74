//! Differential-drive robot with a 16-beam planar LiDAR in a walled world.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{cast_rays, Point, Polygon, Segment};
use crate::{Error, Result};

pub const N_BEAMS: usize = 16;
/// Scans closer than this end the episode with the collision penalty.
pub const COLLISION_DISTANCE: f64 = 0.2;
/// Minimum scan reading required of every spawn pose.
pub const SPAWN_CLEARANCE: f64 = 0.3;
pub const COLLISION_REWARD: f64 = -5.0;
pub const MAX_SPAWN_ATTEMPTS: usize = 1000;
/// Step length used when backing away from a wall after a collision.
const REALIGN_STEP: f64 = 0.02;
const REALIGN_MAX_STEPS: usize = 200;

/// Reward for linear velocity `v`, angular velocity `w` and scan minimum `d_min`.
pub fn nav_reward(v: f64, w: f64, d_min: f64) -> f64 {
    if d_min >= COLLISION_DISTANCE {
        3.0 * v - (w / 2.0).abs() - 0.5 * (1.0 - d_min)
    } else {
        COLLISION_REWARD
    }
}

/// Walls, robot limits and episode length of a navigation task.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NavWorld {
    pub name: String,
    /// Outer wall; the free space lies inside it.
    pub boundary: Polygon,
    /// Solid obstacles; the free space lies outside them.
    pub obstacles: Vec<Polygon>,
    /// Extra thin walls.
    pub segments: Vec<Segment>,
    pub v_max: f64,
    pub w_max: f64,
    pub dt: f64,
    pub n_beams: usize,
    pub max_range: f64,
    pub time_limit: f64,
    /// Time constant of a first-order velocity response; 0 tracks commands exactly.
    pub velocity_lag: f64,
    #[serde(skip)]
    walls: Vec<Segment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavState {
    pub pose: Pose,
    pub v: f64,
    pub w: f64,
    pub elapsed: f64,
    pub steps: usize,
}

/// Raw scan and velocities, in meters and SI rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub ranges: Vec<f64>,
    pub v: f64,
    pub w: f64,
}

impl Observation {
    pub fn d_min(&self) -> f64 {
        self.ranges.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Network input: ranges over `max_range`, `v / v_max`, `w / w_max`.
    pub fn features(&self, world: &NavWorld) -> Vec<f64> {
        let mut f: Vec<f64> = self.ranges.iter().map(|r| r / world.max_range).collect();
        f.push(self.v / world.v_max);
        f.push(self.w / world.w_max);
        f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub d_min: f64,
    pub collision: bool,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

impl NavWorld {
    /// Builds a world with the default robot limits and sensor.
    pub fn new(name: &str, boundary: Polygon, obstacles: Vec<Polygon>, time_limit: f64) -> Result<Self> {
        let mut world = Self {
            name: name.into(),
            boundary,
            obstacles,
            segments: Vec::new(),
            v_max: 0.5,
            w_max: 1.5,
            dt: 0.1,
            n_beams: N_BEAMS,
            max_range: 3.5,
            time_limit,
            velocity_lag: 0.0,
            walls: Vec::new(),
        };
        world.finalize()?;
        Ok(world)
    }

    /// Validates parameters and rebuilds the wall list; call after editing fields.
    pub fn finalize(&mut self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.boundary.vertices.len() < 3 {
            return fail("world boundary needs at least three vertices".into());
        }
        if let Some(i) = self.obstacles.iter().position(|o| o.vertices.len() < 3) {
            return fail(format!("obstacle {i} needs at least three vertices"));
        }
        if self.n_beams != N_BEAMS {
            return fail(format!("the scan has {N_BEAMS} beams, got {}", self.n_beams));
        }
        for (name, v) in [
            ("v_max", self.v_max),
            ("w_max", self.w_max),
            ("dt", self.dt),
            ("max_range", self.max_range),
            ("time_limit", self.time_limit),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.velocity_lag.is_finite() && self.velocity_lag >= 0.0) {
            return fail(format!("velocity_lag must be non-negative, got {}", self.velocity_lag));
        }
        let vertices = self.boundary.vertices.iter().chain(self.obstacles.iter().flat_map(|o| &o.vertices));
        let endpoints = self.segments.iter().flat_map(|s| [&s.a, &s.b]);
        if vertices.chain(endpoints).any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return fail("wall coordinates must be finite".into());
        }
        self.walls = self
            .boundary
            .edges()
            .chain(self.obstacles.iter().flat_map(Polygon::edges))
            .chain(self.segments.iter().copied())
            .collect();
        Ok(())
    }

    pub fn walls(&self) -> &[Segment] {
        &self.walls
    }

    /// Steps per episode, `⌈time_limit / dt⌉`.
    pub fn max_steps(&self) -> usize {
        let n = self.time_limit / self.dt;
        let r = n.round();
        if (n - r).abs() < 1e-9 {
            r as usize
        } else {
            n.ceil() as usize
        }
    }

    /// Inside the boundary and outside every obstacle.
    pub fn is_free(&self, p: Point) -> bool {
        self.boundary.contains(p) && !self.obstacles.iter().any(|o| o.contains(p))
    }

    pub fn raycast(&self, pose: &Pose) -> Result<Vec<f64>> {
        if !(pose.x.is_finite() && pose.y.is_finite() && pose.theta.is_finite()) {
            return Err(Error::State("non-finite pose".into()));
        }
        if !self.is_free(pose.position()) {
            return Err(Error::State(format!(
                "pose ({}, {}) is not in free space",
                pose.x, pose.y
            )));
        }
        Ok(cast_rays(&self.walls, pose.position(), pose.theta, self.n_beams, self.max_range))
    }

    /// Maps a normalized action to forward-only velocity commands.
    pub fn apply_control(&self, a: &[f64]) -> (f64, f64) {
        let v = self.v_max * (0.5 * a[0] + 0.5);
        let w = self.w_max * a[1];
        (v, w)
    }

    pub fn observe(&self, state: &NavState) -> Result<Observation> {
        Ok(Observation {
            ranges: self.raycast(&state.pose)?,
            v: state.v,
            w: state.w,
        })
    }

    fn check_action(a: &[f64]) -> Result<[f64; 2]> {
        if a.len() != 2 {
            return Err(Error::Argument(format!("navigation actions have 2 components, got {}", a.len())));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("non-finite action".into()));
        }
        Ok([a[0].clamp(-1.0, 1.0), a[1].clamp(-1.0, 1.0)])
    }

    /// Advances one control period.
    pub fn step(&self, state: &NavState, a: &[f64]) -> Result<(NavState, StepResult)> {
        let a = Self::check_action(a)?;
        let (v_cmd, w_cmd) = self.apply_control(&a);
        let (v, w) = if self.velocity_lag == 0.0 {
            (v_cmd, w_cmd)
        } else {
            let g = self.dt / (self.velocity_lag + self.dt);
            (state.v + g * (v_cmd - state.v), state.w + g * (w_cmd - state.w))
        };
        let p = state.pose;
        let moved = Pose {
            x: p.x + v * p.theta.cos() * self.dt,
            y: p.y + v * p.theta.sin() * self.dt,
            theta: wrap_angle(p.theta + w * self.dt),
        };
        let path = Segment {
            a: p.position(),
            b: moved.position(),
        };
        let crossed = !self.is_free(moved.position()) || self.walls.iter().any(|wall| wall.intersects(&path));
        let (pose, ranges, d_min) = if crossed {
            let stay = Pose { theta: moved.theta, ..p };
            let ranges = self.raycast(&stay)?;
            (stay, ranges, 0.0)
        } else {
            let ranges = self.raycast(&moved)?;
            let d = ranges.iter().copied().fold(f64::INFINITY, f64::min);
            (moved, ranges, d)
        };
        let steps = state.steps + 1;
        let next = NavState {
            pose,
            v,
            w,
            elapsed: steps as f64 * self.dt,
            steps,
        };
        let collision = d_min < COLLISION_DISTANCE;
        let truncated = steps >= self.max_steps();
        Ok((
            next,
            StepResult {
                observation: Observation { ranges, v, w },
                reward: nav_reward(v, w, d_min),
                done: collision || truncated,
                info: StepInfo {
                    d_min,
                    collision,
                    truncated,
                },
            },
        ))
    }

    fn clearance(&self, pose: &Pose) -> Option<f64> {
        self.raycast(pose)
            .ok()
            .map(|r| r.into_iter().fold(f64::INFINITY, f64::min))
    }

    fn at_rest(&self, pose: Pose) -> NavState {
        NavState {
            pose,
            v: 0.0,
            w: 0.0,
            elapsed: 0.0,
            steps: 0,
        }
    }

    fn nearest_wall(&self, p: Point) -> Segment {
        *self
            .walls
            .iter()
            .min_by(|a, b| a.distance_to(p).total_cmp(&b.distance_to(p)))
            .expect("worlds have walls")
    }

    fn parallel_heading<R: Rng + ?Sized>(wall: &Segment, rng: &mut R) -> f64 {
        let flip = if rng.random_bool(0.5) { PI } else { 0.0 };
        wrap_angle(wall.heading() + flip)
    }

    /// Uniform pose in the bounding box of the boundary, by rejection.
    fn spawn_uniform<R: Rng + ?Sized>(&self, rng: &mut R, align: bool) -> Result<NavState> {
        let (lo, hi) = self.boundary.bounds();
        for _ in 0..MAX_SPAWN_ATTEMPTS {
            let p = Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
            let theta = if align {
                Self::parallel_heading(&self.nearest_wall(p), rng)
            } else {
                rng.random_range(-PI..PI)
            };
            let pose = Pose { x: p.x, y: p.y, theta };
            if self.clearance(&pose).is_some_and(|d| d > SPAWN_CLEARANCE) {
                return Ok(self.at_rest(pose));
            }
        }
        Err(Error::Config(format!(
            "no pose with clearance {SPAWN_CLEARANCE} found in {MAX_SPAWN_ATTEMPTS} samples of world {:?}",
            self.name
        )))
    }

    /// Turns parallel to the nearest wall and backs away from it until the
    /// scan clears [`SPAWN_CLEARANCE`].
    fn realign<R: Rng + ?Sized>(&self, from: &NavState, rng: &mut R) -> Result<NavState> {
        let p = from.pose.position();
        let wall = self.nearest_wall(p);
        let theta = Self::parallel_heading(&wall, rng);
        let c = wall.closest_point(p);
        let (mut dx, mut dy) = (p.x - c.x, p.y - c.y);
        let norm = dx.hypot(dy);
        if norm > 1e-9 {
            dx /= norm;
            dy /= norm;
        } else {
            let len = wall.length().max(1e-12);
            dx = -(wall.b.y - wall.a.y) / len;
            dy = (wall.b.x - wall.a.x) / len;
            if !self.is_free(Point::new(p.x + 1e-3 * dx, p.y + 1e-3 * dy)) {
                dx = -dx;
                dy = -dy;
            }
        }
        for k in 0..=REALIGN_MAX_STEPS {
            let s = k as f64 * REALIGN_STEP;
            let pose = Pose {
                x: p.x + s * dx,
                y: p.y + s * dy,
                theta,
            };
            if !self.is_free(pose.position()) {
                break;
            }
            if self.clearance(&pose).is_some_and(|d| d > SPAWN_CLEARANCE) {
                return Ok(self.at_rest(pose));
            }
        }
        self.spawn_uniform(rng, true)
    }

    /// New episode start. After a collision the robot is repositioned from
    /// `collided_at`; otherwise it is placed uniformly at random.
    pub fn reset<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        collided_at: Option<&NavState>,
    ) -> Result<(NavState, Observation)> {
        let state = match collided_at {
            Some(prev) => self.realign(prev, rng)?,
            None => self.spawn_uniform(rng, false)?,
        };
        let obs = self.observe(&state)?;
        Ok((state, obs))
    }
}
