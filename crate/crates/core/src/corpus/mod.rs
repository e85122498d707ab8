//! Dialogue corpus preparation: ingestion, normalization, vocabulary,
//! filtering, expansion into labelled examples and the train/test split.

mod dataset;
mod ingest;
pub mod manifest;
mod normalize;
mod vocab;

pub use dataset::{
    expand_pair, filter_pairs, split_examples, CorpusStats, Split, TrainingExample,
};
pub use ingest::{ingest, parse, CorpusFormat};
pub use manifest::{read_manifest, write_manifest, Manifest, ManifestError};
pub use normalize::{is_emoticon, normalize, normalize_pairs};
pub use vocab::{build_vocabulary, ClassIndex, Vocabulary, EOS_INDEX};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path} is not valid UTF-8 (first bad byte at offset {offset})")]
    Encoding { path: String, offset: usize },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("no character reaches min_frequency = {min_frequency} in the response sentences")]
    EmptyVocabulary { min_frequency: u64 },
    #[error("pair {pair_id}: response character {ch:?} is not in the vocabulary")]
    OutOfVocabulary { pair_id: u64, ch: char },
    #[error("train_fraction must lie strictly between 0 and 1, got {0}")]
    TrainFraction(f64),
}

/// One (input, response) dialogue turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialoguePair {
    pub pair_id: u64,
    pub input: Vec<char>,
    pub response: Vec<char>,
}

impl DialoguePair {
    pub fn new(pair_id: u64, input: &str, response: &str) -> Self {
        DialoguePair {
            pair_id,
            input: input.chars().collect(),
            response: response.chars().collect(),
        }
    }

    pub fn input_text(&self) -> String {
        self.input.iter().collect()
    }

    pub fn response_text(&self) -> String {
        self.response.iter().collect()
    }
}
