use super::DialoguePair;

const EMOTICON_RANGES: &[(u32, u32)] = &[
    (0x1F600, 0x1F64F), // Emoticons
    (0x1F300, 0x1F5FF), // Misc Symbols and Pictographs
    (0x1F680, 0x1F6FF), // Transport and Map
    (0x1F900, 0x1F9FF), // Supplemental Symbols and Pictographs
    (0x2700, 0x27BF),   // Dingbats
    (0x2600, 0x26FF),   // Misc Symbols
    (0xFE0E, 0xFE0F),   // variation selectors
];

pub fn is_emoticon(ch: char) -> bool {
    let cp = ch as u32;
    EMOTICON_RANGES.iter().any(|&(lo, hi)| (lo..=hi).contains(&cp))
}

/// Drops emoticons, trims, and collapses whitespace runs to one space.
pub fn normalize(text: &[char]) -> Vec<char> {
    let mut out = Vec::with_capacity(text.len());
    let mut pending_space = false;
    for &ch in text.iter().filter(|&&c| !is_emoticon(c)) {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.push(ch);
    }
    out
}

/// Normalizes both sides of every pair and drops pairs left with an empty
/// side. Pair ids are kept.
pub fn normalize_pairs(pairs: Vec<DialoguePair>) -> Vec<DialoguePair> {
    pairs
        .into_iter()
        .filter_map(|p| {
            let input = normalize(&p.input);
            let response = normalize(&p.response);
            (!input.is_empty() && !response.is_empty()).then_some(DialoguePair {
                pair_id: p.pair_id,
                input,
                response,
            })
        })
        .collect()
}
