//! `edged3` command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edged3::agents::{AgentKind, Preset};
use edged3::bench::{TimingOptions, TrackingAllocator};
use edged3::run::{
    cmd_bench, cmd_eval, cmd_expectile_demo, cmd_sweep, cmd_train, BenchOptions, DemoConfig,
    RunConfig, RunStatus,
};
use edged3::Error;

#[global_allocator]
static ALLOC: TrackingAllocator = TrackingAllocator;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "edged3", version, about = "Expectile actor-critic training, evaluation and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one agent and write curve, diagnostics and checkpoint.
    Train(RunArgs),
    /// Noiseless rollouts of a saved checkpoint.
    Eval(EvalArgs),
    /// Per-update timing and memory accounting on the synthetic workload.
    Bench(BenchArgs),
    /// One training run per (alpha, beta) cell.
    Sweep(SweepArgs),
    /// Expectile polynomial fits on the noisy cubic dataset.
    ExpectileDemo(DemoArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, conflicts_with = "seconds")]
    steps: Option<u64>,
    /// Wall-clock budget; replaces the step budget.
    #[arg(long)]
    seconds: Option<f64>,
    #[arg(long, value_parser = parse_kind)]
    agent: Option<AgentKind>,
    /// Built-in environment (corridor, unstructured, pointmass) or map file.
    #[arg(long)]
    env: Option<String>,
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    #[arg(long)]
    warmup: Option<u64>,
    #[arg(long)]
    eval_interval: Option<u64>,
    #[arg(long)]
    eval_episodes: Option<usize>,
    #[arg(long)]
    log_interval: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    save_replay: bool,
}

impl RunArgs {
    fn resolve(&self) -> edged3::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.out {
            c.out = Some(v.clone());
        }
        if let Some(v) = self.steps {
            c.steps = v;
            c.seconds = None;
        }
        if let Some(v) = self.seconds {
            c.seconds = Some(v);
        }
        if let Some(v) = self.agent {
            c.agent = v;
        }
        if let Some(v) = &self.env {
            c.env = v.clone();
        }
        if let Some(v) = self.preset {
            c.preset = v;
        }
        if let Some(v) = self.warmup {
            c.warmup = v;
        }
        if let Some(v) = self.eval_interval {
            c.eval_interval = v;
        }
        if let Some(v) = self.eval_episodes {
            c.eval_episodes = v;
        }
        if let Some(v) = self.log_interval {
            c.log_interval = v;
        }
        if self.alpha.is_some() {
            c.overrides.alpha = self.alpha;
        }
        if self.beta.is_some() {
            c.overrides.beta = self.beta;
        }
        c.save_replay |= self.save_replay;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, default_value = "corridor")]
    env: String,
    #[arg(long, default_value_t = 10)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated agent kinds.
    #[arg(long, value_delimiter = ',', value_parser = parse_kind)]
    agents: Vec<AgentKind>,
    #[arg(long, default_value_t = edged3::bench::DEFAULT_TIMING_STEPS)]
    steps: usize,
    #[arg(long, default_value_t = edged3::bench::DEFAULT_TIMING_SEEDS)]
    seeds: usize,
    #[arg(long, default_value_t = edged3::bench::DEFAULT_BLOCK)]
    block: usize,
    #[arg(long, value_parser = parse_preset, default_value = "simulation")]
    preset: Preset,
    #[arg(long)]
    memory_only: bool,
    /// Also measure peak heap over this many synthetic updates.
    #[arg(long)]
    peak_steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Cells as `alpha:beta`, comma-separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair, required = true)]
    grid: Vec<(f64, f64)>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct DemoArgs {
    /// Pairs as `alpha:beta`, comma-separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair, default_value = "1:4,1:1,4:1")]
    pairs: Vec<(f64, f64)>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<AgentKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected alpha:beta, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numeric(_) => EXIT_NUMERIC,
        Error::Io(_) | Error::Format(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values serialize"));
}

fn run(cli: Cli) -> edged3::Result<u8> {
    match cli.command {
        Command::Train(args) => {
            let cfg = args.resolve()?;
            let rec = cmd_train(&cfg)?;
            print_json(&serde_json::json!({
                "status": rec.status,
                "error": rec.error,
                "steps": rec.steps,
                "train_steps": rec.train_steps,
                "episodes": rec.episodes,
                "elapsed_s": rec.elapsed_s,
                "updates_per_second": rec.updates_per_second(),
                "final_eval": rec.final_eval,
                "best_mean_return": rec.best_mean_return(),
                "checkpoint": rec.checkpoint,
            }));
            Ok(match rec.status {
                RunStatus::Completed => 0,
                RunStatus::Failed => EXIT_NUMERIC,
            })
        }
        Command::Eval(args) => {
            let r = cmd_eval(&args.checkpoint, &args.env, args.episodes, args.seed, args.out.as_deref())?;
            print_json(&serde_json::to_value(&r)?);
            Ok(0)
        }
        Command::Bench(args) => {
            let opts = BenchOptions {
                kinds: if args.agents.is_empty() {
                    AgentKind::ALL.to_vec()
                } else {
                    args.agents
                },
                timing: TimingOptions {
                    steps: args.steps,
                    seeds: args.seeds,
                    block: args.block,
                    ..TimingOptions::default()
                },
                preset: args.preset,
                memory_only: args.memory_only,
                peak_steps: args.peak_steps,
            };
            let report = cmd_bench(&opts, args.out.as_deref())?;
            for t in &report.timing {
                println!(
                    "{:<10} mean {:8.3} ms/step  std {:7.3}  median {:8.3}",
                    t.agent.name(),
                    t.mean_ms,
                    t.std_ms,
                    t.median_ms
                );
            }
            for m in &report.memory {
                println!(
                    "{:<10} networks {}  params {}  bytes {}{}",
                    m.agent.name(),
                    m.network_count,
                    m.param_count,
                    m.param_bytes,
                    m.peak_heap_bytes.map(|b| format!("  peak heap {b}")).unwrap_or_default()
                );
            }
            Ok(0)
        }
        Command::Sweep(args) => {
            let base = args.run.resolve()?;
            let results = cmd_sweep(&args.grid, &base, args.jobs)?;
            let rows: Vec<_> = results.iter().map(|(r, _)| r).collect();
            print_json(&serde_json::to_value(&rows)?);
            Ok(0)
        }
        Command::ExpectileDemo(args) => {
            let cfg = DemoConfig {
                pairs: args.pairs,
                seed: args.seed,
                steps: args.steps,
                samples: args.samples,
                ..DemoConfig::default()
            };
            let r = cmd_expectile_demo(&cfg, args.out.as_deref())?;
            print_json(&serde_json::json!({ "fits": r.fits }));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("edged3: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
