//! Continuous-control actor-critic agents built around an expectile critic loss.
//!
//! The crate bundles everything needed to train and measure the four agent
//! variants (DDPG, EdgeDDPG, TD3 and EdgeD3) without an external tensor
//! framework:
//!
//! - [`numkit`]: dense MLPs with exact reverse-mode gradients, Adam and Polyak averaging.
//! - [`expectile`]: the asymmetric squared loss, a reference expectile solver and decay schedules.
//! - [`replay`]: a bounded ring buffer with uniform sampling.
//! - [`agents`]: the shared actor-critic scaffold and the four update rules.
//! - [`envs`]: a 2D differential-drive LiDAR simulator and a point-mass regulation task.
//! - [`bench`]: per-update wall-clock timing and exact parameter-memory accounting.
//! - [`run`]: training, evaluation, sweeps and the expectile regression demo.

pub mod agents;
pub mod artifact;
pub mod bench;
pub mod envs;
pub mod error;
pub mod expectile;
pub mod numkit;
pub mod replay;
pub mod rng;
pub mod run;

pub use error::{Error, Result};

/// Version string embedded in every artifact written by the crate.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
