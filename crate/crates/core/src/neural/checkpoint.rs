use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::model::{Adam, Mlp};
use super::observation::ObsLayout;
use super::TrainConfig;

pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to evaluate a model or resume its training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    /// SHA-256 over the training config (minus the episode budget) and the
    /// observation layout.
    pub config_hash: String,
    pub config: TrainConfig,
    pub layout: ObsLayout,
    pub model: Mlp,
    pub optimizer: Adam,
    pub episodes_done: u64,
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint format: {0}")]
    Format(#[from] serde_json::Error),
    #[error("checkpoint version {found}, expected {CHECKPOINT_VERSION}")]
    Version { found: u32 },
    #[error("checkpoint config hash does not match its contents")]
    Hash,
    #[error("checkpoint parameters do not match the network shape")]
    Shape,
}

pub fn config_hash(config: &TrainConfig, layout: &ObsLayout) -> String {
    let mut c = config.clone();
    c.episodes = 0;
    let text = serde_json::to_string(&(c, layout)).expect("config serializes");
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

impl Checkpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CheckpointError> {
        let c: Checkpoint = serde_json::from_str(text)?;
        if c.version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version { found: c.version });
        }
        if c.config_hash != config_hash(&c.config, &c.layout) {
            return Err(CheckpointError::Hash);
        }
        let n = c.config.shape(&c.layout).num_params();
        if c.model.shape != c.config.shape(&c.layout)
            || c.model.params.len() != n
            || c.optimizer.m.len() != n
            || c.optimizer.v.len() != n
        {
            return Err(CheckpointError::Shape);
        }
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
