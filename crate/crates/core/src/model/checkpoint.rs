//! Checkpoint container.
//!
//! ```text
//! offset  size  content
//! 0       8     magic "SCHATCKP"
//! 8       4     format version, u32 little-endian (currently 1)
//! 12      4     header length H, u32 little-endian
//! 16      H     UTF-8 header, `key=value` lines:
//!                 input_px, input_channels, conv_stages (comma list),
//!                 fc_width, num_classes, seed, trained_examples,
//!                 vocab_fingerprint, param_count
//! 16+H    4*N   N = param_count parameters, f32 little-endian, in the
//!               order given by `ModelConfig::layout_table`
//! ```
//! Nothing may follow the payload.

use std::collections::HashMap;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{ModelConfig, ModelError};
use crate::corpus::Vocabulary;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SCHATCKP";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("not a checkpoint (bad magic)")]
    Magic,
    #[error("unsupported checkpoint version {0} (expected {CHECKPOINT_VERSION})")]
    Version(u32),
    #[error("checkpoint truncated: needed {needed} bytes, found {found}")]
    Truncated { needed: usize, found: usize },
    #[error("{0} trailing bytes after the parameter payload")]
    Trailing(usize),
    #[error("bad checkpoint header: {0}")]
    Header(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheckpoint {
    pub config: ModelConfig,
    pub parameters: Vec<f32>,
    pub trained_examples: u64,
    /// Fingerprint of the vocabulary the labels come from; empty until
    /// the checkpoint is bound to one.
    pub vocab_fingerprint: String,
}

impl ModelCheckpoint {
    pub fn new(config: ModelConfig, parameters: Vec<f32>, trained_examples: u64, vocab_fingerprint: String) -> Self {
        ModelCheckpoint {
            config,
            parameters,
            trained_examples,
            vocab_fingerprint,
        }
    }

    pub fn is_bound(&self) -> bool {
        !self.vocab_fingerprint.is_empty()
    }

    /// Binds an unbound checkpoint to `vocab`, or checks that a bound one
    /// matches it.
    pub fn bind_vocab(&mut self, vocab: &Vocabulary) -> Result<(), ModelError> {
        if !self.is_bound() {
            if vocab.len() != self.config.num_classes {
                return Err(ModelError::Config(format!(
                    "model has {} classes but the vocabulary has {}",
                    self.config.num_classes,
                    vocab.len()
                )));
            }
            self.vocab_fingerprint = vocab.fingerprint();
        }
        self.check_vocab(vocab)
    }

    pub fn check_vocab(&self, vocab: &Vocabulary) -> Result<(), ModelError> {
        let found = vocab.fingerprint();
        if found != self.vocab_fingerprint || vocab.len() != self.config.num_classes {
            return Err(ModelError::VocabMismatch {
                expected: self.vocab_fingerprint.clone(),
                found,
            });
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut header = self.config.to_text();
        header.push_str(&format!(
            "trained_examples={}\nvocab_fingerprint={}\nparam_count={}\n",
            self.trained_examples,
            self.vocab_fingerprint,
            self.parameters.len()
        ));
        let mut out = Vec::with_capacity(16 + header.len() + 4 * self.parameters.len());
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(header.as_bytes());
        for p in &self.parameters {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let need = |needed: usize| {
            if bytes.len() < needed {
                Err(CheckpointError::Truncated {
                    needed,
                    found: bytes.len(),
                })
            } else {
                Ok(())
            }
        };
        need(8)?;
        if &bytes[..8] != CHECKPOINT_MAGIC {
            return Err(CheckpointError::Magic);
        }
        need(16)?;
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(version));
        }
        let header_len = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        need(16 + header_len)?;
        let header = std::str::from_utf8(&bytes[16..16 + header_len])
            .map_err(|_| CheckpointError::Header("header is not UTF-8".into()))?;
        let (config, trained_examples, vocab_fingerprint, param_count) = parse_header(header)?;
        let start = 16 + header_len;
        let end = start + 4 * param_count;
        need(end)?;
        if bytes.len() > end {
            return Err(CheckpointError::Trailing(bytes.len() - end));
        }
        let parameters = bytes[start..end]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(ModelCheckpoint {
            config,
            parameters,
            trained_examples,
            vocab_fingerprint,
        })
    }

    /// Hex prefix of the SHA-256 of the serialized checkpoint.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn parse_header(header: &str) -> Result<(ModelConfig, u64, String, usize), CheckpointError> {
    let bad = |m: String| CheckpointError::Header(m);
    let mut map = HashMap::new();
    for line in header.lines() {
        let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("line without `=`: {line:?}")))?;
        map.insert(k, v);
    }
    let get = |k: &str| map.get(k).copied().ok_or_else(|| bad(format!("missing `{k}`")));
    let num = |k: &str| -> Result<u64, CheckpointError> {
        get(k)?.parse().map_err(|_| bad(format!("`{k}` is not an integer")))
    };
    let conv_stages = get("conv_stages")?
        .split(',')
        .map(|s| s.parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| bad("bad conv_stages".into()))?;
    let config = ModelConfig {
        input_px: num("input_px")? as usize,
        input_channels: num("input_channels")? as usize,
        conv_stages,
        fc_width: num("fc_width")? as usize,
        num_classes: num("num_classes")? as usize,
        seed: num("seed")?,
    };
    config.validate().map_err(|e| bad(e.to_string()))?;
    let param_count = num("param_count")? as usize;
    if param_count != config.param_count() {
        return Err(bad(format!(
            "param_count {param_count} does not match the {} parameters the config implies",
            config.param_count()
        )));
    }
    Ok((config, num("trained_examples")?, get("vocab_fingerprint")?.to_string(), param_count))
}

pub fn save_checkpoint(checkpoint: &ModelCheckpoint, path: impl AsRef<Path>) -> Result<(), CheckpointError> {
    let path = path.as_ref();
    std::fs::write(path, checkpoint.to_bytes()).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelCheckpoint, CheckpointError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ModelCheckpoint::from_bytes(&bytes)
}
