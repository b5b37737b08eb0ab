use std::collections::HashMap;

use capeval::{
    build_pairs, corpus_precision, extract_category, generate, train_lm, Caption, CoarseCategory,
    Corpus, FineTag, GenerationConfig, PrecisionReport, TaggedCaption, Token, TokenizeConfig,
};
use num_rational::Ratio;
use proptest::prelude::*;

fn tok(s: &str) -> Token {
    Token::new(s).unwrap()
}

fn captions(raw: &[Vec<u8>]) -> Vec<Caption> {
    raw.iter()
        .enumerate()
        .map(|(i, words)| Caption::new(i.to_string(), words.iter().map(|w| tok(&format!("w{w}"))).collect()))
        .collect()
}

fn raw_captions() -> impl Strategy<Value = Vec<Vec<u8>>> {
    prop::collection::vec(prop::collection::vec(0u8..8, 1..7), 1..6)
}

proptest! {
    #[test]
    fn continuation_distribution_sums_to_one(raw in raw_captions(), order in 1usize..4, ctx in prop::collection::vec(0u8..8, 0..3)) {
        let lm = train_lm(&captions(&raw), order).unwrap();
        let context: Vec<Token> = ctx.iter().map(|w| tok(&format!("w{w}"))).collect();
        if let Some(dist) = lm.continuation_distribution(&context) {
            let sum: f64 = dist.iter().map(|(_, p)| p).sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    /// Unigram counts, computed by hand, match the model's table, and the
    /// stored total adds one end marker per caption.
    #[test]
    fn unigram_counts_match_brute_force(raw in raw_captions()) {
        let caps = captions(&raw);
        let lm = train_lm(&caps, 3).unwrap();
        let mut expected: HashMap<&Token, u64> = HashMap::new();
        for c in &caps {
            for t in &c.tokens {
                *expected.entry(t).or_insert(0) += 1;
            }
        }
        for (t, n) in &expected {
            prop_assert_eq!(lm.count(&[], t), *n);
        }
        let tokens: u64 = expected.values().sum();
        prop_assert_eq!(lm.unigram_total(), tokens + caps.len() as u64);
        prop_assert_eq!(lm.count(&[], lm.end_token()), caps.len() as u64);
    }

    #[test]
    fn scores_are_positive_and_at_most_one(raw in raw_captions(), ctx in prop::collection::vec(0u8..10, 0..3), w in 0u8..10) {
        let lm = train_lm(&captions(&raw), 3).unwrap();
        let context: Vec<Token> = ctx.iter().map(|w| tok(&format!("w{w}"))).collect();
        let s = lm.score(&context, &tok(&format!("w{w}")));
        prop_assert!(s > 0.0 && s <= 1.0 && s.is_finite());
    }

    #[test]
    fn generation_covers_nouns(raw in raw_captions(), source in prop::collection::vec(0u8..10, 0..4), beam in 1usize..5) {
        let lm = train_lm(&captions(&raw), 2).unwrap();
        let source: Vec<Token> = source.iter().map(|w| tok(&format!("w{w}"))).collect();
        let cfg = GenerationConfig { beam_width: beam, max_length: source.len() + 4, ..Default::default() };
        let out = generate(&lm, &source, &cfg).unwrap();
        prop_assert!(out.full_coverage);
        prop_assert!(!out.tokens.is_empty());
        prop_assert!(out.tokens.len() <= cfg.max_length);
        let mut remaining = source.clone();
        for t in &out.tokens {
            if let Some(i) = remaining.iter().position(|r| r == t) {
                remaining.remove(i);
            }
        }
        prop_assert!(remaining.is_empty());
    }

    /// Each pair's source is a permutation of its caption's nouns.
    #[test]
    fn pairs_are_noun_permutations(tags in prop::collection::vec(prop::sample::select(vec!["NN", "NNS", "DT", "VBZ", "JJ"]), 1..9), seed: u64, k in 1usize..4) {
        let tokens: Vec<Token> = (0..tags.len()).map(|i| tok(&format!("t{}", i % 3))).collect();
        let tagged = TaggedCaption::new(
            Caption::new("1", tokens),
            tags.iter().map(|t| FineTag::parse(t).unwrap()).collect(),
            "m",
        ).unwrap();
        let mut nouns = extract_category(&tagged, CoarseCategory::Noun);
        nouns.sort();
        let pairs = build_pairs(std::slice::from_ref(&tagged), k, seed).unwrap();
        prop_assert_eq!(pairs.len(), k);
        for pair in pairs {
            let mut src = pair.source.clone();
            src.sort();
            prop_assert_eq!(&src, &nouns);
            prop_assert_eq!(&pair.target, &tagged.caption);
        }
    }

    /// Totals shrink by one per sentence per order; on single-reference
    /// corpora matched counts are non-increasing too.
    #[test]
    fn counts_shrink_with_order(raw in prop::collection::vec((prop::collection::vec(0u8..4, 1..8), prop::collection::vec(0u8..4, 1..8)), 1..5)) {
        let cfg = TokenizeConfig::default();
        let corpus = Corpus::from_pairs(raw.iter().enumerate().map(|(i, (c, r))| {
            let text = |v: &Vec<u8>| v.iter().map(|w| format!("w{w}")).collect::<Vec<_>>().join(" ");
            (Caption::from_text(i.to_string(), &text(c), cfg), vec![Caption::from_text(i.to_string(), &text(r), cfg)])
        })).unwrap();
        let report: PrecisionReport<f64> = corpus_precision(&corpus, 4).unwrap();
        for n in 1..4 {
            prop_assert!(report.total[n] <= report.total[n - 1]);
            prop_assert!(report.matched[n] <= report.matched[n - 1]);
        }
    }
}

/// Pooled precision is not monotone in n: a short miss drags P-1 down more
/// than P-2, which it does not contribute to.
#[test]
fn pooled_precision_can_rise_with_order() {
    let cfg = TokenizeConfig::default();
    let corpus = Corpus::from_pairs([
        (Caption::from_text("1", "x", cfg), vec![Caption::from_text("1", "y", cfg)]),
        (Caption::from_text("2", "a b", cfg), vec![Caption::from_text("2", "a b", cfg)]),
    ])
    .unwrap();
    let report: PrecisionReport<f64> = corpus_precision(&corpus, 2).unwrap();
    assert_eq!(report.precision_ratio(1), Some(Ratio::new(2, 3)));
    assert_eq!(report.precision_ratio(2), Some(Ratio::from_integer(1)));
}
