use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{AgentConfig, AgentKind, Preset};
use crate::expectile::{DecaySchedule, ExpectileParams};
use crate::replay::DEFAULT_CAPACITY;
use crate::{Error, Result};

/// Optional replacements for individual [`AgentConfig`] fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actor_period: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecaySchedule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_explore: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_clip: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr_actor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr_critic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explore_with_target: Option<bool>,
}

impl AgentOverrides {
    pub fn apply(&self, mut c: AgentConfig) -> Result<AgentConfig> {
        if let Some(v) = &self.hidden {
            c.hidden = v.clone();
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    c.$field = v;
                }
            )*};
        }
        set!(gamma, tau1, tau2, actor_period, decay, sigma_explore, sigma_target, noise_clip, batch_size, lr_actor, lr_critic, explore_with_target);
        if self.alpha.is_some() || self.beta.is_some() {
            c.expectile = ExpectileParams::new(
                self.alpha.unwrap_or(c.expectile.alpha()),
                self.beta.unwrap_or(c.expectile.beta()),
            )?;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Everything that determines a training run.
///
/// Stored as JSON; every field is optional in a config file and falls back
/// to [`RunConfig::default`]. With `seconds` set the run stops on the
/// wall-clock budget and `steps` is ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub agent: AgentKind,
    /// Built-in environment name or path to a map file.
    pub env: String,
    pub preset: Preset,
    pub steps: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
    /// Initial environment steps taken with uniform random actions.
    pub warmup: u64,
    pub eval_interval: u64,
    pub eval_episodes: usize,
    /// Diagnostics are recorded every `log_interval` training steps; must
    /// divide `eval_interval`.
    pub log_interval: u64,
    pub seed: u64,
    pub replay_capacity: usize,
    pub overrides: AgentOverrides,
    pub save_replay: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            agent: AgentKind::EdgeD3,
            env: "corridor".into(),
            preset: Preset::Simulation,
            steps: 100_000,
            seconds: None,
            warmup: 1000,
            eval_interval: 5000,
            eval_episodes: 10,
            log_interval: 100,
            seed: 0,
            replay_capacity: DEFAULT_CAPACITY,
            overrides: AgentOverrides::default(),
            save_replay: false,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.into()));
        if self.eval_interval == 0 || self.eval_episodes == 0 {
            return fail("evaluation interval and episode count must be positive");
        }
        if self.log_interval == 0 || self.eval_interval % self.log_interval != 0 {
            return fail("log_interval must be positive and divide eval_interval");
        }
        if self.replay_capacity == 0 {
            return fail("replay capacity must be positive");
        }
        if let Some(s) = self.seconds {
            if !(s.is_finite() && s > 0.0) {
                return fail("seconds budget must be positive");
            }
        }
        if self.env.is_empty() {
            return fail("environment name is empty");
        }
        Ok(())
    }

    /// Agent hyperparameters for the given problem dimensions.
    pub fn agent_config(&self, state_dim: usize, action_dim: usize) -> Result<AgentConfig> {
        let base = AgentConfig::for_kind(self.agent, state_dim, action_dim).with_preset(self.preset);
        self.overrides.apply(base)
    }

    /// The config as echoed into artifacts: the output location is dropped so
    /// identical runs written to different directories produce identical files.
    pub fn echo(&self) -> RunConfig {
        RunConfig {
            out: None,
            ..self.clone()
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
