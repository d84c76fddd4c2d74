use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::expectile::{DecaySchedule, ExpectileParams};
use crate::{Error, Result};

/// The four actor-critic variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Ddpg,
    EdgeDdpg,
    Td3,
    EdgeD3,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [
        AgentKind::Ddpg,
        AgentKind::EdgeDdpg,
        AgentKind::Td3,
        AgentKind::EdgeD3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Ddpg => "ddpg",
            AgentKind::EdgeDdpg => "edge_ddpg",
            AgentKind::Td3 => "td3",
            AgentKind::EdgeD3 => "edge_d3",
        }
    }

    /// Critic trained with the expectile loss instead of the squared error.
    pub fn uses_expectile(self) -> bool {
        matches!(self, AgentKind::EdgeDdpg | AgentKind::EdgeD3)
    }

    /// Clipped Gaussian noise on the target action.
    pub fn smooths_target(self) -> bool {
        matches!(self, AgentKind::Td3 | AgentKind::EdgeD3)
    }

    pub fn critic_count(self) -> usize {
        if self == AgentKind::Td3 {
            2
        } else {
            1
        }
    }

    /// Online plus target copy of every actor and critic.
    pub fn network_count(self) -> usize {
        2 * (1 + self.critic_count())
    }

    pub fn default_actor_period(self) -> usize {
        match self {
            AgentKind::Td3 | AgentKind::EdgeD3 => 2,
            AgentKind::Ddpg | AgentKind::EdgeDdpg => 1,
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ddpg" => Ok(AgentKind::Ddpg),
            "edge_ddpg" | "edgeddpg" => Ok(AgentKind::EdgeDdpg),
            "td3" => Ok(AgentKind::Td3),
            "edge_d3" | "edged3" => Ok(AgentKind::EdgeD3),
            other => Err(Error::Argument(format!("unknown agent kind {other:?}"))),
        }
    }
}

/// Network/batch presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Two hidden layers of 256, batch 256.
    Simulation,
    /// Three hidden layers of 64, batch 128, for on-device training.
    Edge,
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "simulation" | "sim" | "default" => Ok(Preset::Simulation),
            "edge" => Ok(Preset::Edge),
            other => Err(Error::Argument(format!("unknown preset {other:?}"))),
        }
    }
}

impl Preset {
    pub fn hidden(self) -> Vec<usize> {
        match self {
            Preset::Simulation => vec![256, 256],
            Preset::Edge => vec![64, 64, 64],
        }
    }

    pub fn batch_size(self) -> usize {
        match self {
            Preset::Simulation => 256,
            Preset::Edge => 128,
        }
    }
}

/// Hyperparameters shared by every variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub state_dim: usize,
    pub action_dim: usize,
    /// Hidden widths for both actor and critic.
    pub hidden: Vec<usize>,
    pub gamma: f64,
    /// Critic target rate.
    pub tau1: f64,
    /// Actor target rate.
    pub tau2: f64,
    /// Actor and target updates happen every `actor_period` critic updates.
    pub actor_period: usize,
    pub expectile: ExpectileParams,
    pub decay: DecaySchedule,
    pub sigma_explore: f64,
    pub sigma_target: f64,
    pub noise_clip: f64,
    pub batch_size: usize,
    pub lr_actor: f64,
    pub lr_critic: f64,
    /// Behaviour policy reads the target actor, as in the published pseudocode.
    pub explore_with_target: bool,
}

impl AgentConfig {
    /// Defaults for `kind` on the simulation preset.
    pub fn for_kind(kind: AgentKind, state_dim: usize, action_dim: usize) -> Self {
        Self {
            state_dim,
            action_dim,
            hidden: Preset::Simulation.hidden(),
            gamma: 0.99,
            tau1: 0.005,
            tau2: 0.005,
            actor_period: kind.default_actor_period(),
            expectile: ExpectileParams::default(),
            decay: DecaySchedule::none(),
            sigma_explore: 0.1,
            sigma_target: 0.2,
            noise_clip: 0.5,
            batch_size: Preset::Simulation.batch_size(),
            lr_actor: 3e-4,
            lr_critic: 3e-4,
            explore_with_target: true,
        }
    }

    pub fn with_preset(mut self, preset: Preset) -> Self {
        self.hidden = preset.hidden();
        self.batch_size = preset.batch_size();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.state_dim == 0 || self.action_dim == 0 {
            return fail("state and action dimensions must be positive".into());
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return fail("hidden widths must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return fail(format!("gamma {} outside [0, 1]", self.gamma));
        }
        for (name, tau) in [("tau1", self.tau1), ("tau2", self.tau2)] {
            if !(tau > 0.0 && tau <= 1.0) {
                return fail(format!("{name} {tau} outside (0, 1]"));
            }
        }
        if self.actor_period == 0 {
            return fail("actor period must be at least 1".into());
        }
        if !(self.sigma_explore >= 0.0 && self.sigma_target >= 0.0) {
            return fail("noise standard deviations must be non-negative".into());
        }
        if !(self.noise_clip > 0.0) {
            return fail("noise clip must be positive".into());
        }
        if self.batch_size == 0 {
            return fail("batch size must be positive".into());
        }
        if !(self.lr_actor > 0.0 && self.lr_critic > 0.0) {
            return fail("learning rates must be positive".into());
        }
        Ok(())
    }

    pub fn actor_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.state_dim];
        sizes.extend(&self.hidden);
        sizes.push(self.action_dim);
        sizes
    }

    /// The critic reads `[state | action]` at its first layer.
    pub fn critic_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.state_dim + self.action_dim];
        sizes.extend(&self.hidden);
        sizes.push(1);
        sizes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_round_trip_names() {
        for kind in AgentKind::ALL {
            assert_eq!(kind.name().parse::<AgentKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.name()));
        }
        assert!("sac".parse::<AgentKind>().is_err());
    }

    #[test]
    fn structural_counts() {
        assert_eq!(AgentKind::Td3.network_count(), 6);
        assert_eq!(AgentKind::EdgeD3.network_count(), 4);
        assert_eq!(AgentKind::EdgeD3.default_actor_period(), 2);
        assert_eq!(AgentKind::Ddpg.default_actor_period(), 1);
    }

    #[test]
    fn validation() {
        let base = AgentConfig::for_kind(AgentKind::EdgeD3, 3, 1);
        base.validate().unwrap();
        let mut c = base.clone();
        c.gamma = 1.5;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.actor_period = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.noise_clip = 0.0;
        assert!(c.validate().is_err());
        let mut c = base;
        c.sigma_explore = -0.1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn presets() {
        let c = AgentConfig::for_kind(AgentKind::Td3, 18, 2).with_preset(Preset::Edge);
        assert_eq!(c.hidden, vec![64, 64, 64]);
        assert_eq!(c.batch_size, 128);
        assert_eq!(c.critic_sizes(), vec![20, 64, 64, 64, 1]);
    }
}
