//! Line-oriented manifest: a directory holding `pairs.tsv`, `vocab.tsv`
//! and `examples.tsv`, each opened by a `# superchat-manifest v1 <kind>`
//! header line.
//!
//! ```text
//! pairs.tsv     pair_id <TAB> input <TAB> response
//! vocab.tsv     min_frequency <TAB> n
//!               0 <TAB> EOS <TAB> eos_count
//!               class <TAB> U+XXXX <TAB> frequency      (canonical order)
//! examples.tsv  pair_id <TAB> prefix_len <TAB> label <TAB> train|test
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::dataset::{Split, TrainingExample};
use super::vocab::{Vocabulary, EOS_INDEX};
use super::DialoguePair;

pub const MANIFEST_VERSION: u32 = 1;
pub const PAIRS_FILE: &str = "pairs.tsv";
pub const VOCAB_FILE: &str = "vocab.tsv";
pub const EXAMPLES_FILE: &str = "examples.tsv";

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{file}: unsupported manifest header {found:?} (expected `# superchat-manifest v{MANIFEST_VERSION} {kind}`)")]
    Version {
        file: &'static str,
        kind: &'static str,
        found: String,
    },
    #[error("{file} line {line}: {message}")]
    Malformed {
        file: &'static str,
        line: usize,
        message: String,
    },
    #[error("{file} line {line}: vocabulary is not in canonical order ({message})")]
    NonCanonical {
        file: &'static str,
        line: usize,
        message: String,
    },
    #[error("example at line {line} cites unknown pair {pair_id}")]
    UnknownPair { line: usize, pair_id: u64 },
    #[error("example at line {line} is inconsistent with pair {pair_id}: {message}")]
    Inconsistent { line: usize, pair_id: u64, message: String },
    #[error("pair {pair_id}: text contains a TAB or newline and cannot be written")]
    Unwritable { pair_id: u64 },
    #[error("duplicate pair id {0}")]
    DuplicatePair(u64),
}

/// Everything needed to materialize labelled images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub pairs: Vec<DialoguePair>,
    pub vocab: Vocabulary,
    pub examples: Vec<TrainingExample>,
}

impl Manifest {
    pub fn new(pairs: Vec<DialoguePair>, vocab: Vocabulary, examples: Vec<TrainingExample>) -> Self {
        Manifest { pairs, vocab, examples }
    }

    pub fn pair_index(&self) -> HashMap<u64, &DialoguePair> {
        self.pairs.iter().map(|p| (p.pair_id, p)).collect()
    }

    pub fn examples_in(&self, split: Split) -> impl Iterator<Item = &TrainingExample> {
        self.examples.iter().filter(move |e| e.split == split)
    }

    /// Fully-consistent check used after reading and before writing.
    pub fn validate(&self) -> Result<(), ManifestError> {
        let mut index = HashMap::new();
        for p in &self.pairs {
            if index.insert(p.pair_id, p).is_some() {
                return Err(ManifestError::DuplicatePair(p.pair_id));
            }
        }
        for (i, e) in self.examples.iter().enumerate() {
            check_example(&index, &self.vocab, e, i + 2)?;
        }
        Ok(())
    }
}

fn check_example(
    index: &HashMap<u64, &DialoguePair>,
    vocab: &Vocabulary,
    e: &TrainingExample,
    line: usize,
) -> Result<(), ManifestError> {
    let pair = index.get(&e.pair_id).ok_or(ManifestError::UnknownPair {
        line,
        pair_id: e.pair_id,
    })?;
    let inconsistent = |message: String| ManifestError::Inconsistent {
        line,
        pair_id: e.pair_id,
        message,
    };
    let expected = match pair.response.get(e.prefix_len) {
        Some(&ch) => vocab
            .class_of(ch)
            .ok_or_else(|| inconsistent(format!("response character {ch:?} is not in the vocabulary")))?,
        None if e.prefix_len == pair.response.len() => EOS_INDEX,
        None => {
            return Err(inconsistent(format!(
                "prefix_len {} exceeds response length {}",
                e.prefix_len,
                pair.response.len()
            )))
        }
    };
    if e.label != expected {
        return Err(inconsistent(format!("label {} but expected {expected}", e.label)));
    }
    Ok(())
}

fn header(kind: &str) -> String {
    format!("# superchat-manifest v{MANIFEST_VERSION} {kind}")
}

pub fn write_manifest(manifest: &Manifest, dir: impl AsRef<Path>) -> Result<(), ManifestError> {
    let dir = dir.as_ref();
    manifest.validate()?;
    std::fs::create_dir_all(dir).map_err(|source| ManifestError::Io {
        path: dir.to_path_buf(),
        source,
    })?;

    let mut pairs = header("pairs") + "\n";
    for p in &manifest.pairs {
        if p.input.iter().chain(&p.response).any(|&c| c == '\t' || c == '\n' || c == '\r') {
            return Err(ManifestError::Unwritable { pair_id: p.pair_id });
        }
        writeln!(pairs, "{}\t{}\t{}", p.pair_id, p.input_text(), p.response_text()).unwrap();
    }
    let vocab = header("vocab") + "\n" + &manifest.vocab.to_canonical_text();
    let mut examples = header("examples") + "\n";
    for e in &manifest.examples {
        writeln!(examples, "{}\t{}\t{}\t{}", e.pair_id, e.prefix_len, e.label, e.split).unwrap();
    }
    for (name, body) in [(PAIRS_FILE, pairs), (VOCAB_FILE, vocab), (EXAMPLES_FILE, examples)] {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|source| ManifestError::Io { path, source })?;
    }
    Ok(())
}

fn read_file(dir: &Path, file: &'static str, kind: &'static str) -> Result<String, ManifestError> {
    let path = dir.join(file);
    let text = std::fs::read_to_string(&path).map_err(|source| ManifestError::Io { path, source })?;
    let first = text.lines().next().unwrap_or("");
    if first != header(kind) {
        return Err(ManifestError::Version {
            file,
            kind,
            found: first.to_string(),
        });
    }
    Ok(text)
}

/// Data lines of a file with their 1-based line numbers.
fn body(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().skip(1).map(|(i, l)| (i + 1, l))
}

fn field<T: std::str::FromStr>(file: &'static str, line: usize, name: &str, raw: Option<&str>) -> Result<T, ManifestError> {
    raw.and_then(|s| s.parse().ok()).ok_or_else(|| ManifestError::Malformed {
        file,
        line,
        message: format!("bad or missing field `{name}`"),
    })
}

pub fn read_manifest(dir: impl AsRef<Path>) -> Result<Manifest, ManifestError> {
    let dir = dir.as_ref();
    let pairs = read_pairs(&read_file(dir, PAIRS_FILE, "pairs")?)?;
    let vocab = read_vocab(&read_file(dir, VOCAB_FILE, "vocab")?)?;
    let examples = read_examples(&read_file(dir, EXAMPLES_FILE, "examples")?)?;
    let manifest = Manifest { pairs, vocab, examples };
    manifest.validate()?;
    Ok(manifest)
}

fn read_pairs(text: &str) -> Result<Vec<DialoguePair>, ManifestError> {
    const F: &str = PAIRS_FILE;
    let mut out = Vec::new();
    for (line, l) in body(text) {
        let mut parts = l.split('\t');
        let pair_id = field(F, line, "pair_id", parts.next())?;
        let (Some(input), Some(response), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(ManifestError::Malformed {
                file: F,
                line,
                message: "expected three TAB-separated fields".into(),
            });
        };
        out.push(DialoguePair::new(pair_id, input, response));
    }
    Ok(out)
}

fn read_vocab(text: &str) -> Result<Vocabulary, ManifestError> {
    const F: &str = VOCAB_FILE;
    let mut lines = body(text);
    let malformed = |line, message: &str| ManifestError::Malformed {
        file: F,
        line,
        message: message.to_string(),
    };
    let (line, l) = lines.next().ok_or_else(|| malformed(2, "missing min_frequency line"))?;
    let min_frequency: u64 = match l.split_once('\t') {
        Some(("min_frequency", v)) => field(F, line, "min_frequency", Some(v))?,
        _ => return Err(malformed(line, "expected `min_frequency<TAB>n`")),
    };
    let (line, l) = lines.next().ok_or_else(|| malformed(3, "missing EOS line"))?;
    let eos_frequency: u64 = match l.split('\t').collect::<Vec<_>>().as_slice() {
        ["0", "EOS", n] => field(F, line, "frequency", Some(n))?,
        _ => return Err(malformed(line, "expected `0<TAB>EOS<TAB>n` as the first class")),
    };
    let mut chars: Vec<(char, u64)> = Vec::new();
    for (line, l) in lines {
        let parts: Vec<&str> = l.split('\t').collect();
        let [class, cp, freq] = parts.as_slice() else {
            return Err(malformed(line, "expected three TAB-separated fields"));
        };
        let class: usize = field(F, line, "class", Some(class))?;
        let ch = cp
            .strip_prefix("U+")
            .and_then(|h| u32::from_str_radix(h, 16).ok())
            .and_then(char::from_u32)
            .ok_or_else(|| malformed(line, "bad codepoint"))?;
        let freq: u64 = field(F, line, "frequency", Some(freq))?;
        let non_canonical = |message: String| ManifestError::NonCanonical { file: F, line, message };
        if class != chars.len() + 1 {
            return Err(non_canonical(format!("class {class} where {} was expected", chars.len() + 1)));
        }
        if freq < min_frequency {
            return Err(non_canonical(format!("frequency {freq} below min_frequency {min_frequency}")));
        }
        if let Some(&(prev_ch, prev_freq)) = chars.last() {
            if (prev_freq, std::cmp::Reverse(prev_ch)) <= (freq, std::cmp::Reverse(ch)) {
                return Err(non_canonical(format!("{ch:?} ({freq}) must not follow {prev_ch:?} ({prev_freq})")));
            }
        }
        chars.push((ch, freq));
    }
    if chars.is_empty() {
        return Err(malformed(text.lines().count(), "vocabulary has no character classes"));
    }
    Ok(Vocabulary::from_canonical(chars, eos_frequency, min_frequency))
}

fn read_examples(text: &str) -> Result<Vec<TrainingExample>, ManifestError> {
    const F: &str = EXAMPLES_FILE;
    let mut out = Vec::new();
    for (line, l) in body(text) {
        let mut parts = l.split('\t');
        let pair_id = field(F, line, "pair_id", parts.next())?;
        let prefix_len = field(F, line, "prefix_len", parts.next())?;
        let label = field(F, line, "label", parts.next())?;
        let split: Split = field(F, line, "split", parts.next())?;
        if parts.next().is_some() {
            return Err(ManifestError::Malformed {
                file: F,
                line,
                message: "trailing fields".into(),
            });
        }
        out.push(TrainingExample {
            pair_id,
            prefix_len,
            label,
            split,
        });
    }
    Ok(out)
}
