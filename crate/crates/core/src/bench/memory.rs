use serde::{Deserialize, Serialize};

use super::alloc;
use super::workload::synthetic_workload;
use crate::agents::{Agent, AgentConfig, AgentKind};
use crate::numkit::BYTES_PER_VALUE;
use crate::rng::{stream, Stream};
use crate::Result;

/// Exact parameter storage of one agent kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryReport {
    pub agent: AgentKind,
    /// Online plus target networks.
    pub network_count: usize,
    pub param_count: usize,
    pub param_bytes: usize,
    pub bytes_per_value: usize,
    pub actor_bytes: usize,
    pub critic_bytes: usize,
    /// Peak heap growth over a synthetic run with the replay buffer excluded,
    /// when the tracking allocator is installed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_heap_bytes: Option<usize>,
}

pub fn memory_account(kind: AgentKind, config: &AgentConfig) -> Result<MemoryReport> {
    let agent = Agent::new(kind, config.clone(), 0)?;
    let param_bytes = agent.param_bytes();
    Ok(MemoryReport {
        agent: kind,
        network_count: agent.network_count(),
        param_count: param_bytes / BYTES_PER_VALUE,
        param_bytes,
        bytes_per_value: BYTES_PER_VALUE,
        actor_bytes: agent.actor_bytes(),
        critic_bytes: agent.critic_bytes(),
        peak_heap_bytes: None,
    })
}

/// Heap high-water mark above the pre-filled workload while an agent is built
/// and trained for `steps` synthetic updates. `None` without the tracking
/// allocator.
pub fn measure_peak_heap(kind: AgentKind, config: &AgentConfig, steps: usize, seed: u64) -> Result<Option<usize>> {
    if !alloc::tracking_enabled() {
        return Ok(None);
    }
    let buffer = synthetic_workload(
        config.state_dim,
        config.action_dim,
        super::WORKLOAD_ITEMS.max(config.batch_size),
        seed,
    )?;
    let mut rng = stream(seed, Stream::Train);
    let baseline = alloc::reset_peak();
    let mut agent = Agent::new(kind, config.clone(), seed)?;
    for _ in 0..steps {
        agent.train_step(&buffer, &mut rng)?;
    }
    let peak = alloc::peak_heap_bytes();
    drop(agent);
    Ok(Some(peak.saturating_sub(baseline)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_parameter_counts() {
        let c = AgentConfig::for_kind(AgentKind::EdgeD3, 10, 2);
        let r = memory_account(AgentKind::EdgeD3, &c).unwrap();
        let actor = 10 * 256 + 256 + 256 * 256 + 256 + 256 * 2 + 2;
        let critic = 12 * 256 + 256 + 256 * 256 + 256 + 256 + 1;
        assert_eq!(r.param_count, 2 * (actor + critic));
        assert_eq!(r.param_bytes, 8 * r.param_count);
        assert_eq!(r.actor_bytes, 8 * actor);
        assert_eq!(r.critic_bytes, 8 * critic);
        assert_eq!(r.network_count, 4);
    }
}
