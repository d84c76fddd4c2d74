//! Minimal dense-network engine: batched MLPs, reverse-mode gradients,
//! Adam and Polyak-averaged target copies.

mod adam;
mod checkpoint;
mod matrix;
mod mlp;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{load_network, save_network, NetworkCheckpoint, NETWORK_FORMAT, NETWORK_FORMAT_VERSION};
pub use matrix::{gemm, Matrix};
pub use mlp::{soft_update, Activation, ForwardCache, Layer, Mlp, MlpGradient, BYTES_PER_VALUE};
