//! Versioned checkpoint container: named parameter blocks, optimizer state,
//! and RNG streams. JSON round-trips f64 exactly (shortest-round-trip
//! formatting), so load-after-save is bit-exact.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::adam::AdamState;
use super::mlp::MlpParams;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("unsupported checkpoint version {0} (expected {CHECKPOINT_VERSION})")]
    Version(u32),
    #[error("missing block {0}")]
    MissingBlock(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub blocks: BTreeMap<String, MlpParams>,
    pub optim: BTreeMap<String, AdamState>,
    pub rng_streams: BTreeMap<String, ChaCha8Rng>,
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl Checkpoint {
    pub fn new() -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            blocks: BTreeMap::new(),
            optim: BTreeMap::new(),
            rng_streams: BTreeMap::new(),
            meta: BTreeMap::new(),
        }
    }

    pub fn with_block(mut self, name: &str, params: MlpParams) -> Self {
        self.blocks.insert(name.to_string(), params);
        self
    }

    pub fn block(&self, name: &str) -> Result<&MlpParams, CheckpointError> {
        self.blocks
            .get(name)
            .ok_or_else(|| CheckpointError::MissingBlock(name.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let bytes = serde_json::to_vec(self)?;
        // Write through a temp file so an interrupted save never leaves a
        // truncated checkpoint behind.
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, &bytes)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let bytes = fs::read(path)?;
        let ckpt: Checkpoint = serde_json::from_slice(&bytes)?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(ckpt.version));
        }
        Ok(ckpt)
    }

    /// SHA-256 of the canonical serialization. Used for frozen-model
    /// assertions (e.g. the teacher during distillation).
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("checkpoint serializes");
        hex(&Sha256::digest(&bytes))
    }
}

impl Default for Checkpoint {
    fn default() -> Self {
        Self::new()
    }
}

/// Content hash of a single parameter block.
pub fn params_hash(params: &MlpParams) -> String {
    let bytes = serde_json::to_vec(params).expect("params serialize");
    hex(&Sha256::digest(&bytes))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
