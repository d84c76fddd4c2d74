//! Versioned JSON checkpoints for single networks.
//!
//! Values are written with shortest round-trip formatting and parsed with
//! exact float parsing, so save/load is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::{Activation, Mlp};
use crate::{Error, Result};

pub const NETWORK_FORMAT: &str = "edged3.mlp";
pub const NETWORK_FORMAT_VERSION: u32 = 1;

/// On-disk record of one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCheckpoint {
    pub format: String,
    pub version: u32,
    pub layer_sizes: Vec<usize>,
    pub activations: Vec<Activation>,
    pub network: Mlp,
}

impl NetworkCheckpoint {
    pub fn new(net: &Mlp) -> Self {
        Self {
            format: NETWORK_FORMAT.into(),
            version: NETWORK_FORMAT_VERSION,
            layer_sizes: net.layer_sizes(),
            activations: net.activations().to_vec(),
            network: net.clone(),
        }
    }

    pub fn into_network(self) -> Result<Mlp> {
        if self.format != NETWORK_FORMAT {
            return Err(Error::Format(format!("unknown network format {:?}", self.format)));
        }
        if self.version != NETWORK_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported network format version {}",
                self.version
            )));
        }
        self.network.validate()?;
        if self.network.layer_sizes() != self.layer_sizes
            || self.network.activations() != self.activations.as_slice()
        {
            return Err(Error::Format("checkpoint header disagrees with its weights".into()));
        }
        if !self.network.is_finite() {
            return Err(Error::Numeric("checkpoint contains non-finite weights".into()));
        }
        Ok(self.network)
    }
}

pub fn save_network(net: &Mlp, path: &Path) -> Result<()> {
    let json = serde_json::to_string(&NetworkCheckpoint::new(net))?;
    fs::write(path, json)?;
    Ok(())
}

pub fn load_network(path: &Path) -> Result<Mlp> {
    let text = fs::read_to_string(path)?;
    let ckpt: NetworkCheckpoint = serde_json::from_str(&text)?;
    ckpt.into_network()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let net = Mlp::new(
            &[5, 16, 16, 2],
            &[Activation::Relu, Activation::Relu, Activation::Tanh],
            11,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        save_network(&net, &path).unwrap();
        let back = load_network(&path).unwrap();
        let bits = |n: &Mlp| n.flat_params().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&net), bits(&back));
        assert_eq!(net, back);
    }

    #[test]
    fn rejects_foreign_format() {
        let net = Mlp::new(&[2, 1], &[Activation::Identity], 0).unwrap();
        let mut ckpt = NetworkCheckpoint::new(&net);
        ckpt.format = "other".into();
        assert!(ckpt.into_network().is_err());
        let mut ckpt = NetworkCheckpoint::new(&net);
        ckpt.layer_sizes = vec![3, 1];
        assert!(ckpt.into_network().is_err());
    }
}
