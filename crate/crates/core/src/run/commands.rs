use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::train::{cmd_train, evaluate, EvalResult, RunRecord, RunStatus};
use crate::agents::{Agent, AgentKind, Preset};
use crate::artifact;
use crate::bench::{
    bench_config, measure_peak_heap, memory_account, time_agents, write_report, BenchReport,
    TimingOptions, WorkerGuard,
};
use crate::envs::make_env;
use crate::expectile::{
    cubic_dataset, eval_polynomial, fit_polynomial_expectile, unit_grid, ExpectileParams,
};
use crate::{Error, Result, VERSION};

#[derive(Serialize)]
struct EvalSummary<'a> {
    version: &'a str,
    checkpoint: &'a Path,
    env: &'a str,
    seed: u64,
    #[serde(flatten)]
    result: &'a EvalResult,
}

/// Noiseless rollouts of a saved agent; writes `eval.json` and one
/// `trajectory_<k>.csv` per episode when `out` is given.
pub fn cmd_eval(checkpoint: &Path, env: &str, episodes: usize, seed: u64, out: Option<&Path>) -> Result<EvalResult> {
    let agent = Agent::load(checkpoint)?;
    let template = make_env(env)?;
    let result = evaluate(&agent, &template, episodes, seed, out.is_some())?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let summary = EvalSummary {
            version: VERSION,
            checkpoint,
            env,
            seed,
            result: &result,
        };
        artifact::write_json(&dir.join("eval.json"), &summary)?;
        let pre = artifact::preamble(&serde_json::json!({
            "checkpoint": checkpoint,
            "env": env,
            "episodes": episodes,
            "seed": seed,
            "agent": agent.config(),
        }))?;
        for (k, rows) in result.trajectories.iter().enumerate() {
            artifact::write_csv(&dir.join(format!("trajectory_{k:03}.csv")), &pre, rows)?;
        }
    }
    Ok(result)
}

/// Summary line of one sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: usize,
    pub alpha: f64,
    pub beta: f64,
    pub status: String,
    pub best_mean_return: Option<f64>,
    pub final_mean_return: Option<f64>,
    pub error: Option<String>,
}

pub const SWEEP_SUMMARY_FILE: &str = "summary.csv";

fn cell_dir(base: &Path, i: usize, alpha: f64, beta: f64) -> PathBuf {
    base.join(format!("cell_{i:02}_a{alpha}_b{beta}"))
}

fn run_cell(base: &RunConfig, i: usize, alpha: f64, beta: f64) -> (SweepRow, Option<RunRecord>) {
    let mut row = SweepRow {
        cell: i,
        alpha,
        beta,
        status: "failed".into(),
        best_mean_return: None,
        final_mean_return: None,
        error: None,
    };
    if let Err(e) = ExpectileParams::new(alpha, beta) {
        row.error = Some(e.to_string());
        return (row, None);
    }
    let mut cfg = base.clone();
    cfg.overrides.alpha = Some(alpha);
    cfg.overrides.beta = Some(beta);
    cfg.out = base.out.as_ref().map(|d| cell_dir(d, i, alpha, beta));
    match cmd_train(&cfg) {
        Ok(rec) => {
            row.status = match rec.status {
                RunStatus::Completed => "completed".into(),
                RunStatus::Failed => "failed".into(),
            };
            row.error = rec.error.clone();
            row.best_mean_return = rec.best_mean_return();
            row.final_mean_return = rec.final_eval.as_ref().map(|e| e.mean_return);
            (row, Some(rec))
        }
        Err(e) => {
            row.error = Some(e.to_string());
            (row, None)
        }
    }
}

/// One independent training run per `(α, β)` cell of `grid`, on up to
/// `jobs` threads. Cell failures are reported in their row; the sweep
/// itself only fails on invalid base configuration or summary I/O.
pub fn cmd_sweep(grid: &[(f64, f64)], base: &RunConfig, jobs: usize) -> Result<Vec<(SweepRow, Option<RunRecord>)>> {
    if grid.is_empty() {
        return Err(Error::Argument("sweep grid is empty".into()));
    }
    base.validate()?;
    let results: Vec<(SweepRow, Option<RunRecord>)> = if jobs <= 1 {
        grid.iter()
            .enumerate()
            .map(|(i, &(a, b))| run_cell(base, i, a, b))
            .collect()
    } else {
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<(SweepRow, Option<RunRecord>)>>> = Mutex::new(vec![None; grid.len()]);
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(grid.len()) {
                scope.spawn(|| {
                    let _guard = WorkerGuard::enter();
                    loop {
                        let i = next.fetch_add(1, Ordering::SeqCst);
                        if i >= grid.len() {
                            break;
                        }
                        let (a, b) = grid[i];
                        let out = run_cell(base, i, a, b);
                        slots.lock().expect("sweep slots")[i] = Some(out);
                    }
                });
            }
        });
        slots
            .into_inner()
            .expect("sweep slots")
            .into_iter()
            .map(|s| s.expect("every cell ran"))
            .collect()
    };
    if let Some(dir) = &base.out {
        std::fs::create_dir_all(dir)?;
        let pre = artifact::preamble(&serde_json::json!({ "base": base.echo(), "grid": grid }))?;
        let rows: Vec<&SweepRow> = results.iter().map(|(r, _)| r).collect();
        artifact::write_csv(&dir.join(SWEEP_SUMMARY_FILE), &pre, &rows)?;
    }
    Ok(results)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOptions {
    pub kinds: Vec<AgentKind>,
    pub timing: TimingOptions,
    pub preset: Preset,
    /// Skip the wall-clock part and report only memory.
    pub memory_only: bool,
    /// Synthetic updates for the peak-heap probe; `None` skips it.
    pub peak_steps: Option<usize>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            kinds: AgentKind::ALL.to_vec(),
            timing: TimingOptions::default(),
            preset: Preset::Simulation,
            memory_only: false,
            peak_steps: None,
        }
    }
}

/// Timing and memory reports for every requested kind; writes
/// `bench.json` and `bench.csv` when `out` is given.
pub fn cmd_bench(opts: &BenchOptions, out: Option<&Path>) -> Result<BenchReport> {
    if opts.kinds.is_empty() {
        return Err(Error::Argument("no agent kinds to benchmark".into()));
    }
    let configs: Vec<_> = opts.kinds.iter().map(|&k| (k, bench_config(k, opts.preset))).collect();
    let timing = if opts.memory_only {
        Vec::new()
    } else {
        time_agents(&configs, &opts.timing)?
    };
    let mut memory = Vec::with_capacity(configs.len());
    for (kind, cfg) in &configs {
        let mut m = memory_account(*kind, cfg)?;
        if let Some(steps) = opts.peak_steps {
            m.peak_heap_bytes = measure_peak_heap(*kind, cfg, steps, 0)?;
        }
        memory.push(m);
    }
    let report = BenchReport::new(opts.timing, configs[0].1.clone(), timing, memory);
    if let Some(dir) = out {
        write_report(&report, dir, "bench")?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoConfig {
    pub pairs: Vec<(f64, f64)>,
    pub seed: u64,
    pub samples: usize,
    pub degree: usize,
    pub lr: f64,
    pub steps: usize,
    pub grid_points: usize,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            pairs: vec![(1.0, 4.0), (1.0, 1.0), (4.0, 1.0)],
            seed: 0,
            samples: 1000,
            degree: 3,
            lr: 1e-3,
            steps: 10_000,
            grid_points: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoFit {
    pub alpha: f64,
    pub beta: f64,
    /// Constant term first.
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoResult {
    pub data: Vec<(f64, f64)>,
    pub fits: Vec<DemoFit>,
    pub grid: Vec<f64>,
}

impl DemoResult {
    /// Fitted values of fit `k` on the evaluation grid.
    pub fn grid_values(&self, k: usize) -> Vec<f64> {
        self.grid
            .iter()
            .map(|&x| eval_polynomial(&self.fits[k].coefficients, x))
            .collect()
    }
}

fn fit_column(f: &DemoFit) -> String {
    format!("fit_a{}_b{}", f.alpha, f.beta)
}

/// Expectile polynomial fits on the noisy cubic; writes `demo_data.csv`
/// (samples with fitted values), `demo_grid.csv` and `demo_fits.json`.
pub fn cmd_expectile_demo(cfg: &DemoConfig, out: Option<&Path>) -> Result<DemoResult> {
    if cfg.pairs.is_empty() {
        return Err(Error::Argument("no (alpha, beta) pairs given".into()));
    }
    let data = cubic_dataset(cfg.samples, cfg.seed);
    let fits = cfg
        .pairs
        .iter()
        .map(|&(alpha, beta)| {
            let p = ExpectileParams::new(alpha, beta)?;
            Ok(DemoFit {
                alpha,
                beta,
                coefficients: fit_polynomial_expectile(cfg.degree, &data, &p, cfg.lr, cfg.steps)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let result = DemoResult {
        data,
        fits,
        grid: unit_grid(cfg.grid_points).collect(),
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let pre = artifact::preamble(cfg)?;
        let mut header = vec!["x".to_string(), "y_data".to_string()];
        header.extend(result.fits.iter().map(fit_column));
        let mut sorted = result.data.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let data_rows: Vec<Vec<f64>> = sorted
            .iter()
            .map(|&(x, y)| {
                let mut row = vec![x, y];
                row.extend(result.fits.iter().map(|f| eval_polynomial(&f.coefficients, x)));
                row
            })
            .collect();
        artifact::write_table(&dir.join("demo_data.csv"), &pre, &header, &data_rows)?;
        let mut grid_header = vec!["x".to_string()];
        grid_header.extend(result.fits.iter().map(fit_column));
        let grid_rows: Vec<Vec<f64>> = result
            .grid
            .iter()
            .map(|&x| {
                let mut row = vec![x];
                row.extend(result.fits.iter().map(|f| eval_polynomial(&f.coefficients, x)));
                row
            })
            .collect();
        artifact::write_table(&dir.join("demo_grid.csv"), &pre, &grid_header, &grid_rows)?;
        artifact::write_json(
            &dir.join("demo_fits.json"),
            &serde_json::json!({ "version": VERSION, "config": cfg, "fits": result.fits }),
        )?;
    }
    Ok(result)
}
