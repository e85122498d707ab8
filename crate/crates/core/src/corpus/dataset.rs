use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::vocab::{ClassIndex, Vocabulary, EOS_INDEX};
use super::{CorpusError, DialoguePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}` (expected train or test)")),
        }
    }
}

/// A labelled image described by reference: pair plus how many response
/// characters are already drawn. Pixels are rendered on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrainingExample {
    pub pair_id: u64,
    pub prefix_len: usize,
    pub label: ClassIndex,
    pub split: Split,
}

/// Keeps pairs that fit both cut lengths and whose response only uses
/// vocabulary characters. Order and pair ids are preserved.
pub fn filter_pairs(
    pairs: &[DialoguePair],
    vocab: &Vocabulary,
    input_cut: usize,
    response_cut: usize,
) -> Vec<DialoguePair> {
    pairs
        .iter()
        .filter(|p| {
            p.input.len() <= input_cut
                && p.response.len() <= response_cut
                && p.response.iter().all(|&c| vocab.contains(c))
        })
        .cloned()
        .collect()
}

/// One example per response position plus the final EOS example.
/// Every example starts out in the train split.
pub fn expand_pair(pair: &DialoguePair, vocab: &Vocabulary) -> Result<Vec<TrainingExample>, CorpusError> {
    let mut out = Vec::with_capacity(pair.response.len() + 1);
    for (k, &ch) in pair.response.iter().enumerate() {
        let label = vocab.class_of(ch).ok_or(CorpusError::OutOfVocabulary {
            pair_id: pair.pair_id,
            ch,
        })?;
        out.push(TrainingExample {
            pair_id: pair.pair_id,
            prefix_len: k,
            label,
            split: Split::Train,
        });
    }
    out.push(TrainingExample {
        pair_id: pair.pair_id,
        prefix_len: pair.response.len(),
        label: EOS_INDEX,
        split: Split::Train,
    });
    Ok(out)
}

/// Stratified split: within each label, a seeded shuffle sends
/// `floor(count * train_fraction)` examples (at least one when the class
/// has two or more) to train and the rest to test. Output order matches
/// input order.
pub fn split_examples(
    examples: &[TrainingExample],
    train_fraction: f64,
    seed: u64,
) -> Result<Vec<TrainingExample>, CorpusError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CorpusError::TrainFraction(train_fraction));
    }
    let mut by_class: BTreeMap<ClassIndex, Vec<usize>> = BTreeMap::new();
    for (i, e) in examples.iter().enumerate() {
        by_class.entry(e.label).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = examples.to_vec();
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        let n = members.len();
        let mut n_train = (n as f64 * train_fraction).floor() as usize;
        if n >= 2 && n_train == 0 {
            n_train = 1;
        }
        for (rank, &i) in members.iter().enumerate() {
            out[i].split = if rank < n_train { Split::Train } else { Split::Test };
        }
    }
    Ok(out)
}

/// Per-stage counts of a corpus preparation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusStats {
    pub total_pairs: u64,
    pub distinct_response_chars: u64,
    pub chars_below_min_freq: u64,
    pub vocab_size: u64,
    pub filtered_pairs: u64,
    pub total_examples: u64,
    pub train_examples: u64,
    pub test_examples: u64,
}

impl CorpusStats {
    /// `total_pairs` is the ingested count; `normalized` is what the
    /// vocabulary was counted over.
    pub fn compute(
        total_pairs: usize,
        normalized: &[DialoguePair],
        vocab: &Vocabulary,
        filtered: &[DialoguePair],
        examples: &[TrainingExample],
    ) -> Self {
        let mut distinct: Vec<char> = normalized.iter().flat_map(|p| p.response.iter().copied()).collect();
        distinct.sort_unstable();
        distinct.dedup();
        let distinct = distinct.len() as u64;
        let kept = vocab.len() as u64 - 1;
        let train = examples.iter().filter(|e| e.split == Split::Train).count() as u64;
        CorpusStats {
            total_pairs: total_pairs as u64,
            distinct_response_chars: distinct,
            chars_below_min_freq: distinct - kept,
            vocab_size: vocab.len() as u64,
            filtered_pairs: filtered.len() as u64,
            total_examples: examples.len() as u64,
            train_examples: train,
            test_examples: examples.len() as u64 - train,
        }
    }

    pub fn fields(&self) -> [(&'static str, u64); 8] {
        [
            ("total_pairs", self.total_pairs),
            ("distinct_response_chars", self.distinct_response_chars),
            ("chars_below_min_freq", self.chars_below_min_freq),
            ("vocab_size", self.vocab_size),
            ("filtered_pairs", self.filtered_pairs),
            ("total_examples", self.total_examples),
            ("train_examples", self.train_examples),
            ("test_examples", self.test_examples),
        ]
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.fields() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
