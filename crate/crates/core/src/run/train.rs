use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::agents::{Agent, AgentConfig, StepDiagnostics};
use crate::artifact;
use crate::envs::{make_env, Env, Environment, TrajectoryRow};
use crate::replay::{ReplayBuffer, Transition};
use crate::rng::{stream, Stream};
use crate::{Error, Result, VERSION};

pub const RECORD_SCHEMA: &str = "edged3.run-record";
pub const RECORD_SCHEMA_VERSION: u32 = 1;

pub const CURVE_FILE: &str = "curve.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const EPISODES_FILE: &str = "episodes.csv";
pub const RECORD_FILE: &str = "record.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const REPLAY_FILE: &str = "replay.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Failed,
}

/// Noiseless evaluation at one point of training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub step: u64,
    pub mean_return: f64,
    pub std_return: f64,
    /// Mean best achievable return over the same episodes, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal_return: Option<f64>,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub step: u64,
    pub mean_return: f64,
    pub std_return: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub step: u64,
    pub critic_loss: f64,
    pub mean_q: f64,
    pub actor_objective: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
}

impl From<&StepDiagnostics> for DiagnosticsRow {
    fn from(d: &StepDiagnostics) -> Self {
        Self {
            step: d.step,
            critic_loss: d.critic_loss,
            mean_q: d.mean_q,
            actor_objective: d.actor_objective,
            alpha: d.alpha,
            beta: d.beta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub episode: u64,
    pub end_step: u64,
    pub length: usize,
    pub total_reward: f64,
    pub terminal: bool,
}

/// Outcome of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: String,
    pub schema_version: u32,
    pub version: String,
    pub config: RunConfig,
    pub agent_config: Option<AgentConfig>,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Environment steps taken.
    pub steps: u64,
    pub train_steps: u64,
    pub episodes: u64,
    pub elapsed_s: f64,
    /// Time spent inside `train_step`.
    pub train_s: f64,
    pub curve: Vec<EvalPoint>,
    pub final_eval: Option<EvalPoint>,
    #[serde(skip)]
    pub diagnostics: Vec<StepDiagnostics>,
    #[serde(skip)]
    pub episode_log: Vec<EpisodeRow>,
    pub checkpoint: Option<PathBuf>,
}

impl RunRecord {
    fn new(config: &RunConfig) -> Self {
        Self {
            schema: RECORD_SCHEMA.into(),
            schema_version: RECORD_SCHEMA_VERSION,
            version: VERSION.into(),
            config: config.echo(),
            agent_config: None,
            status: RunStatus::Completed,
            error: None,
            steps: 0,
            train_steps: 0,
            episodes: 0,
            elapsed_s: 0.0,
            train_s: 0.0,
            curve: Vec::new(),
            final_eval: None,
            diagnostics: Vec::new(),
            episode_log: Vec::new(),
            checkpoint: None,
        }
    }

    /// Training updates per second of time spent updating.
    pub fn updates_per_second(&self) -> f64 {
        if self.train_s > 0.0 {
            self.train_steps as f64 / self.train_s
        } else {
            0.0
        }
    }

    pub fn best_mean_return(&self) -> Option<f64> {
        self.curve
            .iter()
            .chain(self.final_eval.as_ref())
            .map(|e| e.mean_return)
            .reduce(f64::max)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let rec: RunRecord = artifact::read_json(path)?;
        if rec.schema != RECORD_SCHEMA || rec.schema_version != RECORD_SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported run record {} v{}",
                rec.schema, rec.schema_version
            )));
        }
        Ok(rec)
    }
}

/// Returns and optional trajectories of noiseless rollouts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub returns: Vec<f64>,
    pub mean_return: f64,
    pub std_return: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal_returns: Option<Vec<f64>>,
    #[serde(skip)]
    pub trajectories: Vec<Vec<TrajectoryRow>>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub(crate) fn check_dims(agent: &Agent, env: &Env) -> Result<()> {
    let c = agent.config();
    if c.state_dim != env.observation_dim() || c.action_dim != env.action_dim() {
        return Err(Error::Argument(format!(
            "agent expects {}-dim states and {}-dim actions, environment {:?} has {} and {}",
            c.state_dim,
            c.action_dim,
            env.name(),
            env.observation_dim(),
            env.action_dim()
        )));
    }
    Ok(())
}

/// Runs `episodes` noiseless episodes, each on a fresh copy of `template`,
/// with initial states drawn from the evaluation stream of `seed`.
pub fn evaluate(agent: &Agent, template: &Env, episodes: usize, seed: u64, record: bool) -> Result<EvalResult> {
    check_dims(agent, template)?;
    if episodes == 0 {
        return Err(Error::Argument("evaluation needs at least one episode".into()));
    }
    let mut rng = stream(seed, Stream::Eval);
    let mut returns = Vec::with_capacity(episodes);
    let mut optimal = Vec::new();
    let mut trajectories = Vec::new();
    for _ in 0..episodes {
        let mut env = template.clone();
        let mut obs = env.reset(&mut rng)?;
        if let Some(best) = env.optimal_return() {
            optimal.push(best);
        }
        let mut total = 0.0;
        let mut rows = Vec::new();
        loop {
            let action = agent.select_action(&obs, false, &mut rng)?;
            let step = env.step(&action)?;
            total += step.reward;
            if record {
                rows.extend(env.trajectory_row(step.reward, step.done));
            }
            obs = step.observation;
            if step.done {
                break;
            }
        }
        returns.push(total);
        if record {
            trajectories.push(rows);
        }
    }
    let (mean_return, std_return) = mean_std(&returns);
    Ok(EvalResult {
        returns,
        mean_return,
        std_return,
        optimal_returns: (optimal.len() == episodes).then_some(optimal),
        trajectories,
    })
}

fn eval_point(agent: &Agent, template: &Env, cfg: &RunConfig, step: u64, start: Instant) -> Result<EvalPoint> {
    let r = evaluate(agent, template, cfg.eval_episodes, cfg.seed, false)?;
    Ok(EvalPoint {
        step,
        mean_return: r.mean_return,
        std_return: r.std_return,
        optimal_return: r.optimal_returns.map(|o| mean_std(&o).0),
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

struct Loop<'a> {
    cfg: &'a RunConfig,
    record: &'a mut RunRecord,
    agent: Option<Agent>,
}

impl Loop<'_> {
    fn run(&mut self, start: Instant) -> Result<()> {
        let cfg = self.cfg;
        let template = make_env(&cfg.env)?;
        let mut env = template.clone();
        let (sd, ad) = (env.observation_dim(), env.action_dim());
        let agent_cfg = cfg.agent_config(sd, ad)?;
        self.record.agent_config = Some(agent_cfg.clone());
        let agent = self.agent.insert(Agent::new(cfg.agent, agent_cfg, cfg.seed)?);
        let mut buffer = ReplayBuffer::new(cfg.replay_capacity, sd, ad)?;
        let mut env_rng = stream(cfg.seed, Stream::Env);
        let mut explore_rng = stream(cfg.seed, Stream::Explore);
        let mut train_rng = stream(cfg.seed, Stream::Train);

        let mut obs = env.reset(&mut env_rng)?;
        let (mut ep_return, mut ep_len) = (0.0, 0usize);
        let mut t: u64 = 0;
        loop {
            let finished = match cfg.seconds {
                Some(s) => start.elapsed().as_secs_f64() >= s,
                None => t >= cfg.steps,
            };
            if finished {
                break;
            }
            t += 1;
            let action: Vec<f64> = if t <= cfg.warmup {
                (0..ad).map(|_| explore_rng.random_range(-1.0..=1.0)).collect()
            } else {
                agent.select_action(&obs, true, &mut explore_rng)?
            };
            let step = env.step(&action)?;
            ep_return += step.reward;
            ep_len += 1;
            buffer.push(Transition {
                s: std::mem::take(&mut obs),
                a: action,
                r: step.reward,
                s_next: step.observation.clone(),
                d: step.terminal,
            })?;
            obs = step.observation;
            if step.done {
                self.record.episodes += 1;
                self.record.episode_log.push(EpisodeRow {
                    episode: self.record.episodes,
                    end_step: t,
                    length: ep_len,
                    total_reward: ep_return,
                    terminal: step.terminal,
                });
                agent.end_episode();
                obs = env.reset(&mut env_rng)?;
                ep_return = 0.0;
                ep_len = 0;
            }
            if t > cfg.warmup && buffer.len() >= agent.config().batch_size {
                let tick = Instant::now();
                let diag = agent.train_step(&buffer, &mut train_rng)?;
                self.record.train_s += tick.elapsed().as_secs_f64();
                self.record.train_steps += 1;
                if t % cfg.log_interval == 0 {
                    self.record.diagnostics.push(diag);
                }
            }
            self.record.steps = t;
            if t % cfg.eval_interval == 0 {
                let point = eval_point(agent, &template, cfg, t, start)?;
                self.record.curve.push(point);
            }
        }
        if t > 0 {
            self.record.final_eval = match self.record.curve.last() {
                Some(last) if last.step == t => Some(last.clone()),
                _ => Some(eval_point(agent, &template, cfg, t, start)?),
            };
        }
        if cfg.save_replay {
            if let Some(dir) = &cfg.out {
                buffer.save(&dir.join(REPLAY_FILE))?;
            }
        }
        Ok(())
    }
}

/// Writes the curve, diagnostics, episode log and record into `dir`.
pub fn write_run_artifacts(record: &RunRecord, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let pre = artifact::preamble(&record.config)?;
    let curve: Vec<CurveRow> = record
        .curve
        .iter()
        .map(|e| CurveRow {
            step: e.step,
            mean_return: e.mean_return,
            std_return: e.std_return,
        })
        .collect();
    let curve_path = dir.join(CURVE_FILE);
    if curve.is_empty() {
        artifact::write_csv_header(&curve_path, &pre, &["step", "mean_return", "std_return"])?;
    } else {
        artifact::write_csv(&curve_path, &pre, &curve)?;
    }
    let diag: Vec<DiagnosticsRow> = record.diagnostics.iter().map(DiagnosticsRow::from).collect();
    let diag_path = dir.join(DIAGNOSTICS_FILE);
    if diag.is_empty() {
        artifact::write_csv_header(
            &diag_path,
            &pre,
            &["step", "critic_loss", "mean_q", "actor_objective", "alpha", "beta"],
        )?;
    } else {
        artifact::write_csv(&diag_path, &pre, &diag)?;
    }
    let ep_path = dir.join(EPISODES_FILE);
    if record.episode_log.is_empty() {
        artifact::write_csv_header(&ep_path, &pre, &["episode", "end_step", "length", "total_reward", "terminal"])?;
    } else {
        artifact::write_csv(&ep_path, &pre, &record.episode_log)?;
    }
    artifact::write_json(&dir.join(RECORD_FILE), record)
}

/// Warm-up with uniform random actions, then one environment step and one
/// training update per iteration, with periodic noiseless evaluation.
///
/// A numeric failure during training ends the run early; the partial record
/// is returned (and written) with status [`RunStatus::Failed`]. Other errors
/// are returned after a best-effort write of the partial record.
pub fn cmd_train(config: &RunConfig) -> Result<RunRecord> {
    config.validate()?;
    let start = Instant::now();
    let mut record = RunRecord::new(config);
    let mut lp = Loop {
        cfg: config,
        record: &mut record,
        agent: None,
    };
    let outcome = lp.run(start);
    let agent = lp.agent.take();
    record.elapsed_s = start.elapsed().as_secs_f64();
    let fatal = match outcome {
        Ok(()) => None,
        Err(Error::Numeric(msg)) => {
            record.status = RunStatus::Failed;
            record.error = Some(format!("numeric error: {msg}"));
            None
        }
        Err(e) => {
            record.status = RunStatus::Failed;
            record.error = Some(e.to_string());
            Some(e)
        }
    };
    if let Some(dir) = &config.out {
        if record.status == RunStatus::Completed {
            if let Some(agent) = &agent {
                let path = dir.join(CHECKPOINT_FILE);
                std::fs::create_dir_all(dir)?;
                agent.save(&path)?;
                record.checkpoint = Some(path);
            }
        }
        let written = write_run_artifacts(&record, dir);
        if fatal.is_none() {
            written?;
        }
    }
    match fatal {
        Some(e) => Err(e),
        None => Ok(record),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_steps_is_an_empty_valid_record() {
        let cfg = RunConfig {
            env: "pointmass".into(),
            steps: 0,
            ..RunConfig::default()
        };
        let rec = cmd_train(&cfg).unwrap();
        assert_eq!(rec.status, RunStatus::Completed);
        assert!(rec.curve.is_empty() && rec.final_eval.is_none());
        assert_eq!(rec.steps, 0);
    }

    #[test]
    fn mean_std_population() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
    }
}
