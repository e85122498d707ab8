use std::path::Path;
use std::str::FromStr;

use super::{CorpusError, DialoguePair};

/// On-disk dialogue formats.
///
/// * `tsv`: one pair per line, `input<TAB>response`.
/// * `conv`: blocks opened by a line `E`, followed by two lines starting
///   with `M ` holding input and response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Tsv,
    Conv,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv" => Ok(CorpusFormat::Tsv),
            "conv" => Ok(CorpusFormat::Conv),
            other => Err(format!("unknown corpus format `{other}` (expected tsv or conv)")),
        }
    }
}

pub fn ingest(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Vec<DialoguePair>, CorpusError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|e| CorpusError::Encoding {
        path: path.display().to_string(),
        offset: e.utf8_error().valid_up_to(),
    })?;
    parse(&text, format)
}

/// Parses corpus text. Pair ids follow file order from 0.
pub fn parse(text: &str, format: CorpusFormat) -> Result<Vec<DialoguePair>, CorpusError> {
    match format {
        CorpusFormat::Tsv => parse_tsv(text),
        CorpusFormat::Conv => parse_conv(text),
    }
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
}

fn parse_tsv(text: &str) -> Result<Vec<DialoguePair>, CorpusError> {
    let mut pairs = Vec::new();
    for (line, l) in lines(text) {
        if l.is_empty() {
            continue;
        }
        let (input, response) = l.split_once('\t').ok_or_else(|| CorpusError::Malformed {
            line,
            message: "expected `input<TAB>response`, found no TAB".into(),
        })?;
        if response.contains('\t') {
            return Err(CorpusError::Malformed {
                line,
                message: "more than one TAB".into(),
            });
        }
        pairs.push(DialoguePair::new(pairs.len() as u64, input, response));
    }
    Ok(pairs)
}

fn message_line(line: usize, l: Option<&str>) -> Result<&str, CorpusError> {
    match l {
        Some("M") => Ok(""),
        Some(l) => l.strip_prefix("M ").ok_or_else(|| CorpusError::Malformed {
            line,
            message: format!("expected a line starting with `M `, found {l:?}"),
        }),
        None => Err(CorpusError::Malformed {
            line,
            message: "block ended before its two `M ` lines".into(),
        }),
    }
}

fn parse_conv(text: &str) -> Result<Vec<DialoguePair>, CorpusError> {
    let mut pairs = Vec::new();
    let mut it = lines(text).peekable();
    while let Some((line, l)) = it.next() {
        if l.is_empty() {
            continue;
        }
        if l != "E" {
            return Err(CorpusError::Malformed {
                line,
                message: format!("expected block header `E`, found {l:?}"),
            });
        }
        let (n1, l1) = it.next().map_or((line + 1, None), |(n, l)| (n, Some(l)));
        let input = message_line(n1, l1)?;
        let (n2, l2) = it.next().map_or((n1 + 1, None), |(n, l)| (n, Some(l)));
        let response = message_line(n2, l2)?;
        pairs.push(DialoguePair::new(pairs.len() as u64, input, response));
        if let Some(&(n, l)) = it.peek() {
            if l.starts_with('M') {
                return Err(CorpusError::Malformed {
                    line: n,
                    message: "block has more than two `M ` lines".into(),
                });
            }
        }
    }
    Ok(pairs)
}
