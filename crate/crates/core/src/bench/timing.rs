use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::workload::synthetic_workload;
use crate::agents::{Agent, AgentConfig, AgentKind};
use crate::rng::{stream, Stream};
use crate::{Error, Result};

pub const WARMUP_STEPS: usize = 100;
pub const DEFAULT_TIMING_STEPS: usize = 10_000;
pub const DEFAULT_TIMING_SEEDS: usize = 10;
/// Steps an agent runs before the next kind takes the processor.
pub const DEFAULT_BLOCK: usize = 50;

static ACTIVE_WORKERS: AtomicUsize = AtomicUsize::new(0);

/// Marks a parallel worker as running for as long as it is alive.
pub struct WorkerGuard(());

impl WorkerGuard {
    pub fn enter() -> Self {
        ACTIVE_WORKERS.fetch_add(1, Ordering::SeqCst);
        WorkerGuard(())
    }
}

impl Drop for WorkerGuard {
    fn drop(&mut self) {
        ACTIVE_WORKERS.fetch_sub(1, Ordering::SeqCst);
    }
}

pub fn active_workers() -> usize {
    ACTIVE_WORKERS.load(Ordering::SeqCst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingOptions {
    pub steps: usize,
    pub seeds: usize,
    pub warmup: usize,
    pub workload_items: usize,
    /// Interleaving granularity when several kinds are timed together.
    pub block: usize,
}

impl Default for TimingOptions {
    fn default() -> Self {
        Self {
            steps: DEFAULT_TIMING_STEPS,
            seeds: DEFAULT_TIMING_SEEDS,
            warmup: WARMUP_STEPS,
            workload_items: super::WORKLOAD_ITEMS,
            block: DEFAULT_BLOCK,
        }
    }
}

/// Wall-clock cost of `train_step` for one agent kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub agent: AgentKind,
    pub steps: usize,
    pub seeds: usize,
    pub warmup: usize,
    /// Over all `steps × seeds` individual measurements.
    pub mean_ms: f64,
    pub std_ms: f64,
    pub median_ms: f64,
    pub per_seed_total_ms: Vec<f64>,
    pub per_seed_mean_ms: Vec<f64>,
}

impl TimingReport {
    pub fn steps_per_second(&self) -> f64 {
        1000.0 / self.mean_ms
    }
}

/// Smallest positive difference between consecutive monotonic clock reads.
pub fn timer_resolution() -> Duration {
    let mut best = Duration::MAX;
    for _ in 0..1000 {
        let a = Instant::now();
        let mut b = Instant::now();
        while b == a {
            b = Instant::now();
        }
        best = best.min(b - a);
    }
    best
}

fn check_preconditions() -> Result<()> {
    let res = timer_resolution();
    if res > Duration::from_micros(1) {
        return Err(Error::Measurement(format!(
            "timer resolution {res:?} is coarser than 1 µs"
        )));
    }
    let workers = active_workers();
    if workers != 0 {
        return Err(Error::Measurement(format!(
            "{workers} sweep workers are running; timing needs an otherwise idle process"
        )));
    }
    Ok(())
}

fn summarize(kind: AgentKind, opts: &TimingOptions, samples: &[Vec<f64>]) -> TimingReport {
    let all: Vec<f64> = samples.iter().flatten().copied().collect();
    let n = all.len() as f64;
    let mean = all.iter().sum::<f64>() / n;
    let var = if all.len() > 1 {
        all.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mut sorted = all.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 0 {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    };
    TimingReport {
        agent: kind,
        steps: opts.steps,
        seeds: opts.seeds,
        warmup: opts.warmup,
        mean_ms: mean,
        std_ms: var.sqrt(),
        median_ms: median,
        per_seed_total_ms: samples.iter().map(|s| s.iter().sum()).collect(),
        per_seed_mean_ms: samples
            .iter()
            .map(|s| s.iter().sum::<f64>() / s.len() as f64)
            .collect(),
    }
}

/// Times several agents on the same per-seed workload, interleaving them in
/// blocks of `opts.block` steps so slow drifts of the host affect all kinds
/// alike. Only `train_step` is inside the timed region.
pub fn time_agents(agents: &[(AgentKind, AgentConfig)], opts: &TimingOptions) -> Result<Vec<TimingReport>> {
    if agents.is_empty() || opts.steps == 0 || opts.seeds == 0 || opts.block == 0 {
        return Err(Error::Argument("timing needs agents, steps, seeds and a block size".into()));
    }
    let (sd, ad) = (agents[0].1.state_dim, agents[0].1.action_dim);
    if agents.iter().any(|(_, c)| c.state_dim != sd || c.action_dim != ad) {
        return Err(Error::Argument("timed agents must share state and action dimensions".into()));
    }
    let max_batch = agents.iter().map(|(_, c)| c.batch_size).max().unwrap_or(0);
    if opts.workload_items < max_batch {
        return Err(Error::Argument(format!(
            "workload of {} items is smaller than a batch of {max_batch}",
            opts.workload_items
        )));
    }
    check_preconditions()?;

    let mut samples: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(opts.seeds); agents.len()];
    for seed in 0..opts.seeds as u64 {
        let buffer = synthetic_workload(sd, ad, opts.workload_items, seed)?;
        let mut runners = agents
            .iter()
            .map(|(kind, cfg)| Ok((Agent::new(*kind, cfg.clone(), seed)?, stream(seed, Stream::Train))))
            .collect::<Result<Vec<_>>>()?;
        for (agent, rng) in &mut runners {
            for _ in 0..opts.warmup {
                agent.train_step(&buffer, rng)?;
            }
        }
        let pushes = buffer.total_pushes();
        let mut times: Vec<Vec<f64>> = vec![Vec::with_capacity(opts.steps); agents.len()];
        let mut done = 0;
        while done < opts.steps {
            let block = opts.block.min(opts.steps - done);
            for ((agent, rng), out) in runners.iter_mut().zip(&mut times) {
                for _ in 0..block {
                    let start = Instant::now();
                    agent.train_step(&buffer, rng)?;
                    out.push(start.elapsed().as_secs_f64() * 1e3);
                }
            }
            done += block;
        }
        if buffer.total_pushes() != pushes {
            return Err(Error::Measurement("workload data changed inside the timed region".into()));
        }
        for (acc, t) in samples.iter_mut().zip(times) {
            acc.push(t);
        }
    }
    Ok(agents
        .iter()
        .zip(&samples)
        .map(|((kind, _), s)| summarize(*kind, opts, s))
        .collect())
}

/// [`time_agents`] for a single kind.
pub fn time_agent(kind: AgentKind, config: &AgentConfig, opts: &TimingOptions) -> Result<TimingReport> {
    let mut reports = time_agents(&[(kind, config.clone())], opts)?;
    Ok(reports.remove(0))
}
