//! Training runs, evaluation, α/β sweeps, benchmarks and the expectile
//! regression demo, each writing CSV/JSON artifacts.

mod commands;
mod config;
mod train;

pub use commands::{
    cmd_bench, cmd_eval, cmd_expectile_demo, cmd_sweep, BenchOptions, DemoConfig, DemoFit,
    DemoResult, SweepRow, SWEEP_SUMMARY_FILE,
};
pub use config::{AgentOverrides, RunConfig};
pub use train::{
    cmd_train, evaluate, write_run_artifacts, CurveRow, DiagnosticsRow, EpisodeRow, EvalPoint,
    EvalResult, RunRecord, RunStatus, CHECKPOINT_FILE, CURVE_FILE, DIAGNOSTICS_FILE, EPISODES_FILE,
    RECORD_FILE, RECORD_SCHEMA, RECORD_SCHEMA_VERSION, REPLAY_FILE,
};
