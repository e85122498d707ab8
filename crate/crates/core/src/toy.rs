//! A ten-pair dialogue corpus small enough to memorize on a desktop CPU,
//! plus helpers that turn it into a ready-to-train manifest.

use crate::corpus::{build_vocabulary, expand_pair, DialoguePair, Manifest, TrainingExample};

pub const TOY_PAIRS: [(&str, &str); 10] = [
    ("你好", "你也好"),
    ("你是谁", "我是小黄鸡"),
    ("早上好", "早安"),
    ("你吃饭了吗", "吃过了"),
    ("我去睡觉了", "晚安好梦"),
    ("无聊中", "我陪你聊天"),
    ("你喜欢我吗", "我喜欢你"),
    ("讨厌", "我错了"),
    ("你在哪里", "我在你心里"),
    ("再见", "拜拜"),
];

pub fn toy_pairs() -> Vec<DialoguePair> {
    TOY_PAIRS
        .iter()
        .enumerate()
        .map(|(i, (q, a))| DialoguePair::new(i as u64, q, a))
        .collect()
}

/// The tab-separated form of [`TOY_PAIRS`], as `ingest` reads it.
pub fn toy_tsv() -> String {
    TOY_PAIRS.iter().map(|(q, a)| format!("{q}\t{a}\n")).collect()
}

/// Every example of the toy corpus in the train split (min frequency 1),
/// the setting for memorization runs.
pub fn memorization_manifest() -> Manifest {
    let pairs = toy_pairs();
    let vocab = build_vocabulary(&pairs, 1).expect("toy corpus is non-empty");
    let examples: Vec<TrainingExample> = pairs
        .iter()
        .flat_map(|p| expand_pair(p, &vocab).expect("toy vocabulary covers its responses"))
        .collect();
    Manifest::new(pairs, vocab, examples)
}
