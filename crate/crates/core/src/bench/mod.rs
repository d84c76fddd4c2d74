//! Resource measurement: per-update wall-clock timing on a synthetic
//! workload and exact parameter-memory accounting.

pub mod alloc;
mod memory;
mod report;
mod timing;
mod workload;

pub use alloc::TrackingAllocator;
pub use memory::{measure_peak_heap, memory_account, MemoryReport};
pub use report::{
    report_rows, validate_report, write_report, BenchReport, BenchRow, HostInfo, REPORT_SCHEMA,
    REPORT_SCHEMA_VERSION,
};
pub use timing::{
    active_workers, time_agent, time_agents, timer_resolution, TimingOptions, TimingReport,
    WorkerGuard, DEFAULT_BLOCK, DEFAULT_TIMING_SEEDS, DEFAULT_TIMING_STEPS, WARMUP_STEPS,
};
pub use workload::{synthetic_workload, WORKLOAD_ACTION_DIM, WORKLOAD_ITEMS, WORKLOAD_STATE_DIM};

use crate::agents::{AgentConfig, AgentKind, Preset};

/// Benchmark configuration for `kind` on the synthetic workload.
pub fn bench_config(kind: AgentKind, preset: Preset) -> AgentConfig {
    AgentConfig::for_kind(kind, WORKLOAD_STATE_DIM, WORKLOAD_ACTION_DIM).with_preset(preset)
}
