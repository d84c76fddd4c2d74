//! DDPG, EdgeDDPG, TD3 and EdgeD3 over one actor-critic scaffold.
//!
//! | kind        | critic loss | critics | target smoothing | actor period |
//! |-------------|-------------|---------|------------------|--------------|
//! | `ddpg`      | squared     | 1       | no               | 1            |
//! | `edge_ddpg` | expectile   | 1       | no               | 1            |
//! | `td3`       | squared     | 2 (min) | yes              | 2            |
//! | `edge_d3`   | expectile   | 1       | yes              | 2            |

mod agent;
mod config;

pub use agent::{dpg_gradient, Agent, Critic, StepDiagnostics, AGENT_FORMAT, AGENT_FORMAT_VERSION};
pub use config::{AgentConfig, AgentKind, Preset};
