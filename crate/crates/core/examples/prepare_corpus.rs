//! Runs the corpus pipeline on a dialogue file and prints per-stage
//! counts. Without an argument the built-in toy corpus is used.
//!
//! ```bash
//! cargo run -p superchat --example prepare_corpus -- corpus.conv conv 1000
//! ```

use superchat::corpus::{
    build_vocabulary, expand_pair, filter_pairs, ingest, normalize_pairs, parse, split_examples, CorpusFormat,
    CorpusStats,
};
use superchat::toy::toy_tsv;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let raw = match args.first() {
        Some(path) => {
            let format: CorpusFormat = args.get(1).map(String::as_str).unwrap_or("tsv").parse()?;
            ingest(path, format)?
        }
        None => parse(&toy_tsv(), CorpusFormat::Tsv)?,
    };
    let min_frequency = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(1);

    let total = raw.len();
    let pairs = normalize_pairs(raw);
    let vocab = build_vocabulary(&pairs, min_frequency)?;
    let filtered = filter_pairs(&pairs, &vocab, 18, 18);
    let mut examples = Vec::new();
    for p in &filtered {
        examples.extend(expand_pair(p, &vocab)?);
    }
    let examples = split_examples(&examples, 0.75, 0)?;
    print!("{}", CorpusStats::compute(total, &pairs, &vocab, &filtered, &examples));

    let top: Vec<String> = vocab.characters().iter().take(5).map(|(c, n)| format!("{c}:{n}")).collect();
    println!("most frequent: {}", top.join(" "));
    println!("vocabulary fingerprint {}", vocab.fingerprint());
    Ok(())
}
