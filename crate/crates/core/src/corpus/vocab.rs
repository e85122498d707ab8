use std::collections::HashMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::{CorpusError, DialoguePair};

pub type ClassIndex = usize;

/// Class index of end-of-sentence. Fixed at 0 so that growing the
/// vocabulary never renumbers it.
pub const EOS_INDEX: ClassIndex = 0;

/// Frequency-filtered response characters. Class 0 is EOS; classes
/// `1..len()` are characters by descending frequency, ties by ascending
/// codepoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    chars: Vec<(char, u64)>,
    eos_frequency: u64,
    min_frequency: u64,
    index: HashMap<char, ClassIndex>,
}

pub fn build_vocabulary(pairs: &[DialoguePair], min_frequency: u64) -> Result<Vocabulary, CorpusError> {
    let mut counts: HashMap<char, u64> = HashMap::new();
    for p in pairs {
        for &ch in &p.response {
            *counts.entry(ch).or_default() += 1;
        }
    }
    let kept: Vec<(char, u64)> = counts
        .into_iter()
        .filter(|&(_, n)| n >= min_frequency)
        .collect();
    if kept.is_empty() {
        return Err(CorpusError::EmptyVocabulary { min_frequency });
    }
    Ok(Vocabulary::from_counts(kept, pairs.len() as u64, min_frequency))
}

impl Vocabulary {
    /// Builds the canonical ordering from raw `(char, frequency)` counts.
    pub fn from_counts(mut chars: Vec<(char, u64)>, eos_frequency: u64, min_frequency: u64) -> Self {
        chars.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        Self::from_canonical(chars, eos_frequency, min_frequency)
    }

    pub(crate) fn from_canonical(chars: Vec<(char, u64)>, eos_frequency: u64, min_frequency: u64) -> Self {
        let index = chars.iter().enumerate().map(|(i, &(c, _))| (c, i + 1)).collect();
        Vocabulary {
            chars,
            eos_frequency,
            min_frequency,
            index,
        }
    }

    /// Number of classes including EOS.
    pub fn len(&self) -> usize {
        self.chars.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_frequency(&self) -> u64 {
        self.min_frequency
    }

    /// Number of response sentences counted; each ends in exactly one EOS.
    pub fn eos_frequency(&self) -> u64 {
        self.eos_frequency
    }

    pub fn class_of(&self, ch: char) -> Option<ClassIndex> {
        self.index.get(&ch).copied()
    }

    pub fn contains(&self, ch: char) -> bool {
        self.index.contains_key(&ch)
    }

    /// Character for a class; `None` for EOS or an out-of-range class.
    pub fn char_of(&self, class: ClassIndex) -> Option<char> {
        class.checked_sub(1).and_then(|i| self.chars.get(i)).map(|&(c, _)| c)
    }

    pub fn frequency_of(&self, class: ClassIndex) -> Option<u64> {
        if class == EOS_INDEX {
            return Some(self.eos_frequency);
        }
        self.chars.get(class - 1).map(|&(_, n)| n)
    }

    /// Character classes in class order (EOS excluded).
    pub fn characters(&self) -> &[(char, u64)] {
        &self.chars
    }

    /// Display label for a class: the character itself, or `<EOS>`.
    pub fn label(&self, class: ClassIndex) -> String {
        match self.char_of(class) {
            Some(c) => c.to_string(),
            None if class == EOS_INDEX => "<EOS>".to_string(),
            None => format!("<class {class}>"),
        }
    }

    /// Canonical text form; the vocab file of a manifest.
    pub fn to_canonical_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "min_frequency\t{}", self.min_frequency).unwrap();
        writeln!(s, "{}\tEOS\t{}", EOS_INDEX, self.eos_frequency).unwrap();
        for (i, &(c, n)) in self.chars.iter().enumerate() {
            writeln!(s, "{}\tU+{:04X}\t{}", i + 1, c as u32, n).unwrap();
        }
        s
    }

    /// First 8 bytes of the SHA-256 of the canonical text, as hex.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_canonical_text().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
