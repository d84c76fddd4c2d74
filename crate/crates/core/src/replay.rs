//! Bounded experience store with uniform sampling with replacement.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::numkit::Matrix;
use crate::{Error, Result};

/// Default capacity of the replay memory.
pub const DEFAULT_CAPACITY: usize = 1_000_000;

pub const BUFFER_FORMAT: &str = "edged3.replay";
pub const BUFFER_FORMAT_VERSION: u32 = 1;

/// One `(s, a, r, s', d)` tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub r: f64,
    pub s_next: Vec<f64>,
    pub d: bool,
}

/// A sampled mini-batch laid out as matrices, one row per transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub states: Matrix,
    pub actions: Matrix,
    pub rewards: Vec<f64>,
    pub next_states: Matrix,
    /// 1.0 where the successor is terminal.
    pub dones: Vec<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn transition(&self, i: usize) -> Transition {
        Transition {
            s: self.states.row(i).to_vec(),
            a: self.actions.row(i).to_vec(),
            r: self.rewards[i],
            s_next: self.next_states.row(i).to_vec(),
            d: self.dones[i] != 0.0,
        }
    }

    pub fn from_transitions(items: &[Transition]) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Argument("empty batch".into()));
        }
        let states = Matrix::from_rows(&items.iter().map(|t| t.s.as_slice()).collect::<Vec<_>>())?;
        let actions = Matrix::from_rows(&items.iter().map(|t| t.a.as_slice()).collect::<Vec<_>>())?;
        let next_states =
            Matrix::from_rows(&items.iter().map(|t| t.s_next.as_slice()).collect::<Vec<_>>())?;
        Ok(Self {
            states,
            actions,
            rewards: items.iter().map(|t| t.r).collect(),
            next_states,
            dones: items.iter().map(|t| if t.d { 1.0 } else { 0.0 }).collect(),
        })
    }
}

/// Ring buffer of transitions stored column-wise in flat arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    state_dim: usize,
    action_dim: usize,
    capacity: usize,
    cursor: usize,
    len: usize,
    pushes: u64,
    states: Vec<f64>,
    actions: Vec<f64>,
    rewards: Vec<f64>,
    next_states: Vec<f64>,
    dones: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    format: String,
    version: u32,
    buffer: ReplayBuffer,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, state_dim: usize, action_dim: usize) -> Result<Self> {
        if capacity == 0 || state_dim == 0 || action_dim == 0 {
            return Err(Error::Config(
                "replay capacity and dimensions must be positive".into(),
            ));
        }
        Ok(Self {
            state_dim,
            action_dim,
            capacity,
            cursor: 0,
            len: 0,
            pushes: 0,
            states: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            next_states: Vec::new(),
            dones: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    /// Total transitions ever pushed, including overwritten ones.
    pub fn total_pushes(&self) -> u64 {
        self.pushes
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if t.s.len() != self.state_dim || t.s_next.len() != self.state_dim {
            return Err(Error::Argument(format!(
                "state dimension {}/{} does not match buffer dimension {}",
                t.s.len(),
                t.s_next.len(),
                self.state_dim
            )));
        }
        if t.a.len() != self.action_dim {
            return Err(Error::Argument(format!(
                "action dimension {} does not match buffer dimension {}",
                t.a.len(),
                self.action_dim
            )));
        }
        if t.a.iter().any(|a| !(-1.0..=1.0).contains(a)) {
            return Err(Error::Argument("action components must lie in [-1, 1]".into()));
        }
        if !t.r.is_finite() || t.s.iter().chain(&t.s_next).any(|v| !v.is_finite()) {
            return Err(Error::Argument("transition contains non-finite values".into()));
        }
        let d = if t.d { 1.0 } else { 0.0 };
        if self.len < self.capacity {
            self.states.extend_from_slice(&t.s);
            self.actions.extend_from_slice(&t.a);
            self.rewards.push(t.r);
            self.next_states.extend_from_slice(&t.s_next);
            self.dones.push(d);
            self.len += 1;
        } else {
            let i = self.cursor;
            let (sd, ad) = (self.state_dim, self.action_dim);
            self.states[i * sd..(i + 1) * sd].copy_from_slice(&t.s);
            self.actions[i * ad..(i + 1) * ad].copy_from_slice(&t.a);
            self.rewards[i] = t.r;
            self.next_states[i * sd..(i + 1) * sd].copy_from_slice(&t.s_next);
            self.dones[i] = d;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        self.pushes += 1;
        Ok(())
    }

    /// Transition at storage slot `i`.
    pub fn get(&self, i: usize) -> Option<Transition> {
        if i >= self.len {
            return None;
        }
        let (sd, ad) = (self.state_dim, self.action_dim);
        Some(Transition {
            s: self.states[i * sd..(i + 1) * sd].to_vec(),
            a: self.actions[i * ad..(i + 1) * ad].to_vec(),
            r: self.rewards[i],
            s_next: self.next_states[i * sd..(i + 1) * sd].to_vec(),
            d: self.dones[i] != 0.0,
        })
    }

    /// Contents from oldest to newest.
    pub fn iter_chronological(&self) -> impl Iterator<Item = Transition> + '_ {
        let start = if self.len < self.capacity { 0 } else { self.cursor };
        (0..self.len).map(move |k| self.get((start + k) % self.capacity).expect("in range"))
    }

    /// Storage slots of `n` uniform draws with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.len == 0 {
            return Err(Error::State("cannot sample from an empty replay buffer".into()));
        }
        Ok((0..n).map(|_| rng.random_range(0..self.len)).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Batch> {
        let idx = self.sample_indices(n, rng)?;
        let (sd, ad) = (self.state_dim, self.action_dim);
        let mut states = Vec::with_capacity(n * sd);
        let mut actions = Vec::with_capacity(n * ad);
        let mut rewards = Vec::with_capacity(n);
        let mut next_states = Vec::with_capacity(n * sd);
        let mut dones = Vec::with_capacity(n);
        for &i in &idx {
            states.extend_from_slice(&self.states[i * sd..(i + 1) * sd]);
            actions.extend_from_slice(&self.actions[i * ad..(i + 1) * ad]);
            rewards.push(self.rewards[i]);
            next_states.extend_from_slice(&self.next_states[i * sd..(i + 1) * sd]);
            dones.push(self.dones[i]);
        }
        Ok(Batch {
            states: Matrix::from_vec(n, sd, states)?,
            actions: Matrix::from_vec(n, ad, actions)?,
            rewards,
            next_states: Matrix::from_vec(n, sd, next_states)?,
            dones,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let snap = Snapshot {
            format: BUFFER_FORMAT.into(),
            version: BUFFER_FORMAT_VERSION,
            buffer: self.clone(),
        };
        fs::write(path, serde_json::to_string(&snap)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let snap: Snapshot = serde_json::from_str(&fs::read_to_string(path)?)?;
        if snap.format != BUFFER_FORMAT || snap.version != BUFFER_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported replay snapshot {} v{}",
                snap.format, snap.version
            )));
        }
        let b = snap.buffer;
        let consistent = b.len <= b.capacity
            && b.cursor < b.capacity
            && b.rewards.len() == b.len
            && b.dones.len() == b.len
            && b.states.len() == b.len * b.state_dim
            && b.next_states.len() == b.len * b.state_dim
            && b.actions.len() == b.len * b.action_dim;
        if !consistent {
            return Err(Error::Format("replay snapshot is internally inconsistent".into()));
        }
        Ok(b)
    }
}
