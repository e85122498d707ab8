use std::collections::BTreeMap;

use proptest::prelude::*;
use superchat::corpus::{
    build_vocabulary, expand_pair, filter_pairs, normalize_pairs, parse, read_manifest, split_examples, write_manifest,
    CorpusFormat, CorpusStats, DialoguePair, Manifest, Split, EOS_INDEX,
};

const FIXTURE: &str = "E\nM 在吗\nM 你好😀\nE\nM 你好\nM 你在\nE\nM 哈哈\nM 😀\n";

#[test]
fn two_pair_fixture_stats_by_hand() {
    let raw = parse(FIXTURE, CorpusFormat::Conv).unwrap();
    assert_eq!(raw.len(), 3);
    let pairs = normalize_pairs(raw);
    // the emoticon-only response leaves nothing to learn from
    assert_eq!(pairs.len(), 2);
    assert_eq!(pairs[0].response_text(), "你好");

    let vocab = build_vocabulary(&pairs, 1).unwrap();
    // 你:2, then 在 (U+5728) before 好 (U+597D) at frequency 1
    assert_eq!(vocab.characters(), &[('你', 2), ('在', 1), ('好', 1)]);
    let filtered = filter_pairs(&pairs, &vocab, 18, 18);
    let examples: Vec<_> = filtered.iter().flat_map(|p| expand_pair(p, &vocab).unwrap()).collect();
    let examples = split_examples(&examples, 0.5, 0).unwrap();
    let stats = CorpusStats::compute(3, &pairs, &vocab, &filtered, &examples);
    // labels: 你 x2 -> 1 train; EOS x2 -> 1 train; 在, 好 x1 -> test
    assert_eq!(
        stats,
        CorpusStats {
            total_pairs: 3,
            distinct_response_chars: 3,
            chars_below_min_freq: 0,
            vocab_size: 4,
            filtered_pairs: 2,
            total_examples: 6,
            train_examples: 2,
            test_examples: 4,
        }
    );

    let strict = build_vocabulary(&pairs, 2).unwrap();
    assert_eq!(strict.len(), 2);
    assert!(filter_pairs(&pairs, &strict, 18, 18).is_empty());
}

#[test]
fn cut_lengths_are_inclusive() {
    let vocab_pairs = vec![DialoguePair::new(0, "x", "ab")];
    let vocab = build_vocabulary(&vocab_pairs, 1).unwrap();
    let at = DialoguePair::new(1, &"x".repeat(18), &"ab".repeat(9));
    let over = DialoguePair::new(2, &"x".repeat(19), "a");
    let kept = filter_pairs(&[at.clone(), over], &vocab, 18, 18);
    assert_eq!(kept, vec![at]);
}

fn text(max: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(prop::sample::select("你我他好的是在了吗不abc".chars().collect::<Vec<_>>()), 1..=max)
        .prop_map(|v| v.into_iter().collect())
}

fn pairs(max_pairs: usize) -> impl Strategy<Value = Vec<DialoguePair>> {
    proptest::collection::vec((text(18), text(18)), 1..=max_pairs).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (q, a))| DialoguePair::new(i as u64, &q, &a))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vocabulary_ignores_pair_order(ps in pairs(20), seed in any::<u64>(), min in 1u64..4) {
        let mut shuffled = ps.clone();
        let n = shuffled.len();
        for i in 0..n {
            shuffled.swap(i, (seed as usize).wrapping_add(i * 7) % n);
        }
        let a = build_vocabulary(&ps, min);
        let b = build_vocabulary(&shuffled, min);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.to_canonical_text(), b.to_canonical_text()),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "order changed whether a vocabulary exists"),
        }
    }

    #[test]
    fn expansion_invariants(ps in pairs(20)) {
        let vocab = build_vocabulary(&ps, 1).unwrap();
        for p in &ps {
            let ex = expand_pair(p, &vocab).unwrap();
            prop_assert_eq!(ex.len(), p.response.len() + 1);
            for (k, e) in ex.iter().enumerate() {
                prop_assert_eq!(e.prefix_len, k);
                prop_assert!(e.label < vocab.len());
                prop_assert_eq!(e.label == EOS_INDEX, k == p.response.len());
                if k < p.response.len() {
                    prop_assert_eq!(vocab.char_of(e.label), Some(p.response[k]));
                }
            }
        }
    }

    #[test]
    fn split_is_stratified(ps in pairs(30), fraction in 0.05f64..0.95, seed in any::<u64>()) {
        let vocab = build_vocabulary(&ps, 1).unwrap();
        let ex: Vec<_> = ps.iter().flat_map(|p| expand_pair(p, &vocab).unwrap()).collect();
        let split = split_examples(&ex, fraction, seed).unwrap();
        prop_assert_eq!(split.len(), ex.len());
        prop_assert_eq!(&split, &split_examples(&ex, fraction, seed).unwrap());
        let mut per_class: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for (a, b) in ex.iter().zip(&split) {
            prop_assert_eq!((a.pair_id, a.prefix_len, a.label), (b.pair_id, b.prefix_len, b.label));
            let slot = per_class.entry(b.label).or_default();
            slot.0 += 1;
            if b.split == Split::Train {
                slot.1 += 1;
            }
        }
        for (n, train) in per_class.values() {
            let mut want = (*n as f64 * fraction).floor() as usize;
            if *n >= 2 && want == 0 {
                want = 1;
            }
            prop_assert_eq!(*train, want);
        }
    }

    #[test]
    fn manifest_round_trip(ps in pairs(15), seed in any::<u64>()) {
        let vocab = build_vocabulary(&ps, 1).unwrap();
        let ex: Vec<_> = ps.iter().flat_map(|p| expand_pair(p, &vocab).unwrap()).collect();
        let ex = split_examples(&ex, 0.75, seed).unwrap();
        let m = Manifest::new(ps, vocab, ex);
        let dir = tempfile::tempdir().unwrap();
        write_manifest(&m, dir.path()).unwrap();
        let back = read_manifest(dir.path()).unwrap();
        prop_assert_eq!(&back.pairs, &m.pairs);
        prop_assert_eq!(&back.examples, &m.examples);
        prop_assert_eq!(back.vocab.to_canonical_text(), m.vocab.to_canonical_text());
        prop_assert_eq!(back.vocab.fingerprint(), m.vocab.fingerprint());
    }
}
