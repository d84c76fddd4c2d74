use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::memory::MemoryReport;
use super::timing::{TimingOptions, TimingReport};
use crate::agents::AgentConfig;
use crate::artifact;
use crate::{Error, Result, VERSION};

pub const REPORT_SCHEMA: &str = "edged3.bench-report";
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Free-form description of the measuring machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostInfo {
    pub os: String,
    pub arch: String,
    pub logical_cpus: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hostname: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpu_model: Option<String>,
}

impl HostInfo {
    pub fn detect() -> Self {
        let cpu_model = std::fs::read_to_string("/proc/cpuinfo").ok().and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|m| m.trim().to_string())
        });
        Self {
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            hostname: std::fs::read_to_string("/etc/hostname")
                .ok()
                .map(|h| h.trim().to_string())
                .filter(|h| !h.is_empty()),
            cpu_model,
        }
    }
}

/// Everything one benchmark invocation measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: String,
    pub schema_version: u32,
    pub version: String,
    pub host: HostInfo,
    pub options: TimingOptions,
    /// Configuration of the first timed agent; the others differ only in
    /// their actor period.
    pub config: AgentConfig,
    pub timing: Vec<TimingReport>,
    pub memory: Vec<MemoryReport>,
}

impl BenchReport {
    pub fn new(options: TimingOptions, config: AgentConfig, timing: Vec<TimingReport>, memory: Vec<MemoryReport>) -> Self {
        Self {
            schema: REPORT_SCHEMA.into(),
            schema_version: REPORT_SCHEMA_VERSION,
            version: VERSION.into(),
            host: HostInfo::detect(),
            options,
            config,
            timing,
            memory,
        }
    }

    /// Relative change of `kind`'s mean ms/step with respect to `reference`.
    pub fn relative_time(&self, kind: crate::agents::AgentKind, reference: crate::agents::AgentKind) -> Option<f64> {
        let find = |k| self.timing.iter().find(|t| t.agent == k).map(|t| t.mean_ms);
        Some(find(kind)? / find(reference)? - 1.0)
    }
}

/// One CSV row per agent kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub agent: String,
    pub steps: usize,
    pub seeds: usize,
    pub mean_ms: Option<f64>,
    pub std_ms: Option<f64>,
    pub median_ms: Option<f64>,
    pub network_count: Option<usize>,
    pub param_count: Option<usize>,
    pub param_bytes: Option<usize>,
    pub peak_heap_bytes: Option<usize>,
}

pub fn report_rows(report: &BenchReport) -> Vec<BenchRow> {
    let mut kinds: Vec<_> = report.timing.iter().map(|t| t.agent).collect();
    for m in &report.memory {
        if !kinds.contains(&m.agent) {
            kinds.push(m.agent);
        }
    }
    kinds
        .into_iter()
        .map(|k| {
            let t = report.timing.iter().find(|t| t.agent == k);
            let m = report.memory.iter().find(|m| m.agent == k);
            BenchRow {
                agent: k.name().into(),
                steps: report.options.steps,
                seeds: report.options.seeds,
                mean_ms: t.map(|t| t.mean_ms),
                std_ms: t.map(|t| t.std_ms),
                median_ms: t.map(|t| t.median_ms),
                network_count: m.map(|m| m.network_count),
                param_count: m.map(|m| m.param_count),
                param_bytes: m.map(|m| m.param_bytes),
                peak_heap_bytes: m.and_then(|m| m.peak_heap_bytes),
            }
        })
        .collect()
}

/// Writes `<stem>.json` and `<stem>.csv` into `dir`.
pub fn write_report(report: &BenchReport, dir: &Path, stem: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    artifact::write_json(&dir.join(format!("{stem}.json")), report)?;
    let mut comments = vec![format!("schema {} {}", report.schema, report.schema_version)];
    comments.extend(artifact::preamble(&serde_json::json!({
        "options": report.options,
        "config": report.config,
        "host": report.host,
    }))?);
    artifact::write_csv(&dir.join(format!("{stem}.csv")), &comments, &report_rows(report))
}

fn require<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Format(format!("{path}: missing field {key:?}")))
}

fn require_number(obj: &Value, key: &str, path: &str) -> Result<f64> {
    require(obj, key, path)?
        .as_f64()
        .ok_or_else(|| Error::Format(format!("{path}.{key}: expected a number")))
}

fn require_string<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a str> {
    require(obj, key, path)?
        .as_str()
        .ok_or_else(|| Error::Format(format!("{path}.{key}: expected a string")))
}

fn require_array<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Vec<Value>> {
    require(obj, key, path)?
        .as_array()
        .ok_or_else(|| Error::Format(format!("{path}.{key}: expected an array")))
}

/// Structural check of a report document against schema version 1.
pub fn validate_report(doc: &Value) -> Result<()> {
    let schema = require_string(doc, "schema", "report")?;
    let version = require_number(doc, "schema_version", "report")?;
    if schema != REPORT_SCHEMA || version != REPORT_SCHEMA_VERSION as f64 {
        return Err(Error::Format(format!("unsupported report schema {schema} v{version}")));
    }
    require_string(doc, "version", "report")?;
    let host = require(doc, "host", "report")?;
    require_string(host, "os", "host")?;
    require_string(host, "arch", "host")?;
    require_number(host, "logical_cpus", "host")?;
    let options = require(doc, "options", "report")?;
    for key in ["steps", "seeds", "warmup", "workload_items", "block"] {
        require_number(options, key, "options")?;
    }
    serde_json::from_value::<AgentConfig>(require(doc, "config", "report")?.clone())
        .map_err(|e| Error::Format(format!("report.config: {e}")))?;
    for (i, t) in require_array(doc, "timing", "report")?.iter().enumerate() {
        let path = format!("timing[{i}]");
        require_string(t, "agent", &path)?;
        let std = require_number(t, "std_ms", &path)?;
        let mean = require_number(t, "mean_ms", &path)?;
        if !(std >= 0.0 && mean > 0.0) {
            return Err(Error::Format(format!("{path}: mean must be positive and std non-negative")));
        }
        require_number(t, "median_ms", &path)?;
        let seeds = require_number(t, "seeds", &path)?;
        if require_array(t, "per_seed_total_ms", &path)?.len() as f64 != seeds {
            return Err(Error::Format(format!("{path}: one total per seed expected")));
        }
    }
    for (i, m) in require_array(doc, "memory", "report")?.iter().enumerate() {
        let path = format!("memory[{i}]");
        require_string(m, "agent", &path)?;
        let count = require_number(m, "param_count", &path)?;
        let bytes = require_number(m, "param_bytes", &path)?;
        let per = require_number(m, "bytes_per_value", &path)?;
        require_number(m, "network_count", &path)?;
        if count * per != bytes {
            return Err(Error::Format(format!("{path}: param_bytes != param_count × bytes_per_value")));
        }
    }
    Ok(())
}
