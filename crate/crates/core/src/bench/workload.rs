use rand_distr::{Distribution, StandardNormal};

use crate::replay::{ReplayBuffer, Transition};
use crate::rng::{stream, Stream};
use crate::{Error, Result};

pub const WORKLOAD_STATE_DIM: usize = 10;
pub const WORKLOAD_ACTION_DIM: usize = 2;
pub const WORKLOAD_ITEMS: usize = 10_000;

/// Replay buffer filled up front with standard-normal transitions.
///
/// Actions are clipped to the `[-1, 1]` box the buffer enforces; every `d`
/// flag is 0.
pub fn synthetic_workload(
    state_dim: usize,
    action_dim: usize,
    items: usize,
    seed: u64,
) -> Result<ReplayBuffer> {
    if items == 0 {
        return Err(Error::Argument("workload needs at least one item".into()));
    }
    let mut rng = stream(seed, Stream::Workload);
    let mut normal = |n: usize| -> Vec<f64> { (0..n).map(|_| StandardNormal.sample(&mut rng)).collect() };
    let mut buffer = ReplayBuffer::new(items, state_dim, action_dim)?;
    for _ in 0..items {
        let s = normal(state_dim);
        let a = normal(action_dim).into_iter().map(|v: f64| v.clamp(-1.0, 1.0)).collect();
        let r = normal(1)[0];
        let s_next = normal(state_dim);
        buffer.push(Transition { s, a, r, s_next, d: false })?;
    }
    Ok(buffer)
}
