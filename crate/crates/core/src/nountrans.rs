//! Blind noun translation: caption generation from a bag of nouns.
//!
//! Training pairs put a random permutation of a caption's nouns on the
//! source side and the caption on the target side. The generator is a
//! stupid-backoff n-gram model decoded with a beam search that must emit
//! every source noun before it may stop. [`blind_pipeline`] feeds it the
//! nouns of a captioning system's own output and scores both caption sets
//! against the same references.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::metrics::{precision_of_pairs, report_table, PrecisionReport, PrecisionTable};
use crate::postag::{extract_category, CoarseCategory, TaggedCaption, TaggerModel};
use crate::report::to_sorted_json;
use crate::scalar::Scalar;
use crate::text::{detokenize, tokenize, Caption, Token, TokenizeConfig};

pub const SENTENCE_START: &str = "<s>";
pub const SENTENCE_END: &str = "</s>";
pub const DEFAULT_LM_ORDER: usize = 3;
pub const DEFAULT_BACKOFF: f64 = 0.4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NounPair {
    pub source: Vec<Token>,
    pub target: Caption,
}

/// `pairs_per_caption` pairs per caption, each with its own shuffle of the
/// caption's nouns. Output is caption-major in input order.
pub fn build_pairs(
    captions: &[TaggedCaption],
    pairs_per_caption: usize,
    seed: u64,
) -> Result<Vec<NounPair>> {
    if pairs_per_caption == 0 {
        return Err(Error::InvalidArgument("pairs_per_caption must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(captions.len() * pairs_per_caption);
    for tagged in captions {
        let nouns = extract_category(tagged, CoarseCategory::Noun);
        for _ in 0..pairs_per_caption {
            let mut source = nouns.clone();
            source.shuffle(&mut rng);
            pairs.push(NounPair {
                source,
                target: tagged.caption.clone(),
            });
        }
    }
    Ok(pairs)
}

/// `source<TAB>target` per line, tokens space-joined.
pub fn write_pairs(pairs: &[NounPair]) -> String {
    let mut out = String::new();
    for pair in pairs {
        out.push_str(&detokenize(&pair.source));
        out.push('\t');
        out.push_str(&pair.target.text());
        out.push('\n');
    }
    out
}

/// Parse a pair file. Targets get ids `pair-<line>`.
pub fn parse_pairs(text: &str) -> Result<Vec<NounPair>> {
    let raw = TokenizeConfig {
        lowercase: false,
        split_punct: false,
    };
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let (source, target) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: "<pairs>".into(),
            line: lineno + 1,
            message: "expected source<TAB>target".into(),
        })?;
        pairs.push(NounPair {
            source: tokenize(source, raw),
            target: Caption::new(format!("pair-{}", lineno + 1), tokenize(target, raw)),
        });
    }
    Ok(pairs)
}

#[derive(Clone, Debug, Default)]
struct ContextEntry {
    total: u64,
    next: HashMap<u32, u64>,
}

/// Stupid-backoff n-gram language model.
///
/// Each caption is padded with `order - 1` start markers and one end
/// marker. Start markers are never predicted, so unigram counts sum to the
/// token count plus one end marker per caption.
#[derive(Clone, Debug)]
pub struct NgramLM {
    order: usize,
    backoff_factor: f64,
    vocab: Vec<Token>,
    ids: HashMap<Token, u32>,
    /// `tables[k - 1]`: context of `k - 1` ids → continuation counts.
    tables: Vec<HashMap<Box<[u32]>, ContextEntry>>,
    unigram_total: u64,
    /// Backed-off unigram score per vocabulary id, `α^(order-1) · (c+1)/(N+V)`.
    floor: Vec<f64>,
    oov_floor: f64,
}

pub fn train_lm(captions: &[Caption], order: usize) -> Result<NgramLM> {
    NgramLM::train(captions, order, DEFAULT_BACKOFF)
}

impl NgramLM {
    pub fn train(captions: &[Caption], order: usize, backoff_factor: f64) -> Result<Self> {
        if captions.is_empty() {
            return Err(Error::InvalidArgument("no captions to train on".into()));
        }
        if order == 0 {
            return Err(Error::InvalidArgument("LM order must be at least 1".into()));
        }
        let mut tokens: Vec<&Token> = captions.iter().flat_map(|c| &c.tokens).collect();
        if tokens.is_empty() {
            return Err(Error::InvalidArgument("training captions contain no tokens".into()));
        }
        if let Some(bad) = tokens
            .iter()
            .find(|t| t.as_str() == SENTENCE_START || t.as_str() == SENTENCE_END)
        {
            return Err(Error::InvalidArgument(format!(
                "training text contains reserved marker {bad}"
            )));
        }
        tokens.sort();
        tokens.dedup();
        let mut vocab: Vec<Token> = vec![
            Token::new(SENTENCE_START).unwrap(),
            Token::new(SENTENCE_END).unwrap(),
        ];
        vocab.extend(tokens.into_iter().cloned());

        let mut counts: Vec<BTreeMap<Vec<Token>, BTreeMap<Token, u64>>> = vec![BTreeMap::new(); order];
        let start = vocab[0].clone();
        let end = vocab[1].clone();
        for caption in captions {
            let mut padded = vec![start.clone(); order - 1];
            padded.extend(caption.tokens.iter().cloned());
            padded.push(end.clone());
            for i in order - 1..padded.len() {
                for k in 1..=order {
                    let ctx = padded[i + 1 - k..i].to_vec();
                    *counts[k - 1]
                        .entry(ctx)
                        .or_default()
                        .entry(padded[i].clone())
                        .or_insert(0) += 1;
                }
            }
        }
        Self::from_counts(order, backoff_factor, vocab, counts)
    }

    fn from_counts(
        order: usize,
        backoff_factor: f64,
        vocab: Vec<Token>,
        counts: Vec<BTreeMap<Vec<Token>, BTreeMap<Token, u64>>>,
    ) -> Result<Self> {
        if !(backoff_factor > 0.0 && backoff_factor <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "backoff factor {backoff_factor} outside (0, 1]"
            )));
        }
        let ids: HashMap<Token, u32> =
            vocab.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        let lookup = |t: &Token| {
            ids.get(t)
                .copied()
                .ok_or_else(|| Error::InvalidModel(format!("token {t} missing from vocabulary")))
        };
        let mut tables = Vec::with_capacity(order);
        for (k, table) in counts.into_iter().enumerate() {
            let mut out: HashMap<Box<[u32]>, ContextEntry> = HashMap::with_capacity(table.len());
            for (ctx, next) in table {
                if ctx.len() != k {
                    return Err(Error::InvalidModel(format!(
                        "context of length {} in order-{} table",
                        ctx.len(),
                        k + 1
                    )));
                }
                let key: Box<[u32]> = ctx.iter().map(lookup).collect::<Result<Vec<_>>>()?.into();
                let mut entry = ContextEntry::default();
                for (w, c) in next {
                    entry.total += c;
                    entry.next.insert(lookup(&w)?, c);
                }
                out.insert(key, entry);
            }
            tables.push(out);
        }
        let unigram_total = tables[0].get(&[][..]).map_or(0, |e| e.total);
        // start marker excluded: it is never predicted
        let predictable = (vocab.len() - 1) as f64;
        let scale = backoff_factor.powi(order as i32 - 1);
        let denom = unigram_total as f64 + predictable;
        let unigrams = tables[0].get(&[][..]);
        let floor = (0..vocab.len() as u32)
            .map(|id| {
                let c = unigrams.and_then(|e| e.next.get(&id)).copied().unwrap_or(0);
                scale * (c as f64 + 1.0) / denom
            })
            .collect();
        Ok(NgramLM {
            order,
            backoff_factor,
            vocab,
            ids,
            tables,
            unigram_total,
            floor,
            oov_floor: scale / denom,
        })
    }

    pub fn with_backoff(self, backoff_factor: f64) -> Result<Self> {
        let counts = self.count_tables();
        Self::from_counts(self.order, backoff_factor, self.vocab, counts)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn backoff_factor(&self) -> f64 {
        self.backoff_factor
    }

    /// Words the model can predict, including the end marker.
    pub fn vocabulary(&self) -> impl Iterator<Item = &Token> {
        self.vocab.iter().skip(1)
    }

    pub fn unigram_total(&self) -> u64 {
        self.unigram_total
    }

    pub fn start_token(&self) -> &Token {
        &self.vocab[0]
    }

    pub fn end_token(&self) -> &Token {
        &self.vocab[1]
    }

    /// Raw count of `context · word` in the order-`context.len() + 1` table.
    pub fn count(&self, context: &[Token], word: &Token) -> u64 {
        let (Some(ctx), Some(w)) = (self.ids_of(context), self.ids.get(word)) else {
            return 0;
        };
        self.tables
            .get(ctx.len())
            .and_then(|t| t.get(ctx.as_slice()))
            .and_then(|e| e.next.get(w))
            .copied()
            .unwrap_or(0)
    }

    fn ids_of(&self, tokens: &[Token]) -> Option<Vec<u32>> {
        tokens.iter().map(|t| self.ids.get(t).copied()).collect()
    }

    /// Last `order - 1` history ids, left-padded with start markers. Unknown
    /// history tokens map to `None`.
    fn history(&self, context: &[Option<u32>]) -> Vec<Option<u32>> {
        let need = self.order - 1;
        let mut hist = vec![Some(0u32); need.saturating_sub(context.len())];
        hist.extend_from_slice(&context[context.len().saturating_sub(need)..]);
        hist
    }

    fn score_ids(&self, history: &[Option<u32>], word: Option<u32>) -> f64 {
        let Some(w) = word else {
            return self.oov_floor;
        };
        let mut scale = 1.0;
        for k in (2..=self.order).rev() {
            let ctx = &history[history.len() + 1 - k..];
            if let Some(ctx) = ctx.iter().copied().collect::<Option<Vec<u32>>>() {
                if let Some(entry) = self.tables[k - 1].get(ctx.as_slice()) {
                    if let Some(&c) = entry.next.get(&w) {
                        return scale * c as f64 / entry.total as f64;
                    }
                }
            }
            scale *= self.backoff_factor;
        }
        self.floor[w as usize]
    }

    /// Stupid-backoff score of `word` after `context` (the preceding
    /// caption tokens, without markers). Always finite and positive.
    pub fn score(&self, context: &[Token], word: &Token) -> f64 {
        let ctx: Vec<Option<u32>> = context.iter().map(|t| self.ids.get(t).copied()).collect();
        let hist = self.history(&ctx);
        self.score_ids(&hist, self.ids.get(word).copied())
    }

    /// Σ ln score over the tokens and the end marker.
    pub fn sentence_log_score(&self, tokens: &[Token]) -> f64 {
        let mut total = 0.0;
        for i in 0..=tokens.len() {
            let word = tokens.get(i).unwrap_or(self.end_token());
            total += self.score(&tokens[..i], word).ln();
        }
        total
    }

    /// Relative frequencies of the top-order continuations of `context`, or
    /// `None` when the context was never seen.
    pub fn continuation_distribution(&self, context: &[Token]) -> Option<Vec<(Token, f64)>> {
        let ctx: Vec<Option<u32>> = context.iter().map(|t| self.ids.get(t).copied()).collect();
        let hist: Vec<u32> = self.history(&ctx).into_iter().collect::<Option<_>>()?;
        let entry = self.tables[self.order - 1].get(hist.as_slice())?;
        let mut dist: Vec<(Token, f64)> = entry
            .next
            .iter()
            .map(|(w, c)| (self.vocab[*w as usize].clone(), *c as f64 / entry.total as f64))
            .collect();
        dist.sort_by(|a, b| a.0.cmp(&b.0));
        Some(dist)
    }

    fn count_tables(&self) -> Vec<BTreeMap<Vec<Token>, BTreeMap<Token, u64>>> {
        self.tables
            .iter()
            .map(|table| {
                table
                    .iter()
                    .map(|(ctx, entry)| {
                        let ctx = ctx.iter().map(|i| self.vocab[*i as usize].clone()).collect();
                        let next = entry
                            .next
                            .iter()
                            .map(|(w, c)| (self.vocab[*w as usize].clone(), *c))
                            .collect();
                        (ctx, next)
                    })
                    .collect()
            })
            .collect()
    }

    /// JSON with sorted keys: `order`, `backoff_factor`, and `counts`
    /// keyed by order, then space-joined context, then word.
    pub fn to_json(&self) -> String {
        let mut counts = Map::new();
        for (k, table) in self.count_tables().into_iter().enumerate() {
            let mut ctxs = Map::new();
            for (ctx, next) in table {
                let next: Map<String, Value> =
                    next.into_iter().map(|(w, c)| (w.into(), json!(c))).collect();
                ctxs.insert(detokenize(&ctx), Value::Object(next));
            }
            counts.insert((k + 1).to_string(), Value::Object(ctxs));
        }
        to_sorted_json(&json!({
            "order": self.order,
            "backoff_factor": self.backoff_factor,
            "counts": counts,
        }))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::json("<lm>", e))?;
        let bad = |m: &str| Error::InvalidModel(m.to_owned());
        let order = value["order"].as_u64().ok_or_else(|| bad("missing order"))? as usize;
        let backoff = value["backoff_factor"]
            .as_f64()
            .ok_or_else(|| bad("missing backoff_factor"))?;
        let sections = value["counts"].as_object().ok_or_else(|| bad("missing counts"))?;
        if order == 0 || sections.len() != order {
            return Err(bad("counts sections do not match order"));
        }
        let raw = TokenizeConfig {
            lowercase: false,
            split_punct: false,
        };
        let mut words: Vec<Token> = Vec::new();
        let mut counts = Vec::with_capacity(order);
        for k in 1..=order {
            let section = sections
                .get(&k.to_string())
                .and_then(Value::as_object)
                .ok_or_else(|| bad("missing counts section"))?;
            let mut table = BTreeMap::new();
            for (ctx, next) in section {
                let ctx = tokenize(ctx, raw);
                let next = next.as_object().ok_or_else(|| bad("continuations must be objects"))?;
                let mut row = BTreeMap::new();
                for (w, c) in next {
                    let w = Token::new(w.clone())?;
                    let c = c.as_u64().filter(|c| *c > 0).ok_or_else(|| bad("counts must be positive integers"))?;
                    words.push(w.clone());
                    row.insert(w, c);
                }
                words.extend(ctx.iter().cloned());
                table.insert(ctx, row);
            }
            counts.push(table);
        }
        words.retain(|t| t.as_str() != SENTENCE_START && t.as_str() != SENTENCE_END);
        words.sort();
        words.dedup();
        let mut vocab = vec![
            Token::new(SENTENCE_START).unwrap(),
            Token::new(SENTENCE_END).unwrap(),
        ];
        vocab.extend(words);
        Self::from_counts(order, backoff, vocab, counts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenerationConfig {
    pub beam_width: usize,
    pub max_length: usize,
    /// Added per covered source noun. 4.0 was picked on the desk corpus:
    /// lower values let the LM defer nouns to the end of long generic
    /// prefixes, higher ones collapse output into bare noun lists.
    pub coverage_bonus: f64,
    pub seed: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            beam_width: 8,
            max_length: 20,
            coverage_bonus: 4.0,
            seed: 0,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beam_width == 0 {
            return Err(Error::InvalidArgument("beam_width must be at least 1".into()));
        }
        if self.max_length == 0 {
            return Err(Error::InvalidArgument("max_length must be at least 1".into()));
        }
        if !(self.coverage_bonus.is_finite() && self.coverage_bonus >= 0.0) {
            return Err(Error::InvalidArgument("coverage_bonus must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// A generated caption with its search score.
#[derive(Clone, Debug, PartialEq)]
pub struct Generation {
    pub tokens: Vec<Token>,
    pub score: f64,
    /// False when `max_length` was too short to place every source noun.
    pub full_coverage: bool,
}

impl Generation {
    pub fn degraded(&self) -> bool {
        !self.full_coverage
    }
}

/// Anything that turns a noun sequence into a caption.
pub trait CaptionGenerator: Sync {
    fn generate(&self, source: &[Token]) -> Result<Generation>;
}

/// Coverage-constrained beam search over an [`NgramLM`].
#[derive(Clone, Debug)]
pub struct BeamGenerator<'a> {
    lm: &'a NgramLM,
    config: GenerationConfig,
}

impl<'a> BeamGenerator<'a> {
    pub fn new(lm: &'a NgramLM, config: GenerationConfig) -> Result<Self> {
        config.validate()?;
        Ok(BeamGenerator { lm, config })
    }
}

impl CaptionGenerator for BeamGenerator<'_> {
    fn generate(&self, source: &[Token]) -> Result<Generation> {
        generate(self.lm, source, &self.config)
    }
}

#[derive(Clone, Debug)]
struct Hypothesis {
    words: Vec<u32>,
    /// Multiset of uncovered source ids, sorted.
    remaining: Vec<u32>,
    covered: usize,
    score: f64,
}

struct Search<'a> {
    lm: &'a NgramLM,
    extra: Vec<Token>,
}

impl Search<'_> {
    fn surface(&self, id: u32) -> &Token {
        let base = self.lm.vocab.len();
        if (id as usize) < base {
            &self.lm.vocab[id as usize]
        } else {
            &self.extra[id as usize - base]
        }
    }

    fn lexical_cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        a.iter()
            .map(|&i| self.surface(i))
            .cmp(b.iter().map(|&i| self.surface(i)))
    }

    fn in_vocab(&self, id: u32) -> Option<u32> {
        ((id as usize) < self.lm.vocab.len()).then_some(id)
    }

    /// Dense scores for every in-vocabulary id after `words`.
    fn next_scores(&self, words: &[u32]) -> Vec<f64> {
        let lm = self.lm;
        let ctx: Vec<Option<u32>> = words.iter().map(|&w| self.in_vocab(w)).collect();
        let hist = lm.history(&ctx);
        let mut scores = lm.floor.clone();
        let mut scale = lm.backoff_factor.powi(lm.order as i32 - 2);
        for k in 2..=lm.order {
            let ctx = &hist[hist.len() + 1 - k..];
            if let Some(ctx) = ctx.iter().copied().collect::<Option<Vec<u32>>>() {
                if let Some(entry) = lm.tables[k - 1].get(ctx.as_slice()) {
                    for (&w, &c) in &entry.next {
                        scores[w as usize] = scale * c as f64 / entry.total as f64;
                    }
                }
            }
            scale /= lm.backoff_factor;
        }
        scores
    }

    fn rank(&self, a: &Hypothesis, b: &Hypothesis) -> Ordering {
        b.score
            .total_cmp(&a.score)
            .then_with(|| self.lexical_cmp(&a.words, &b.words))
    }

    fn final_rank(&self, a: &Hypothesis, b: &Hypothesis) -> Ordering {
        let full = |h: &Hypothesis| h.remaining.is_empty();
        full(b)
            .cmp(&full(a))
            .then(b.covered.cmp(&a.covered))
            .then_with(|| self.rank(a, b))
    }
}

/// Beam search for the best caption that contains every noun in `source`.
///
/// Hypotheses score `Σ ln score(w | ctx) + coverage_bonus · covered`. A
/// hypothesis may only emit the end marker once all source nouns are
/// covered; when the remaining length budget equals the number of uncovered
/// nouns, only those nouns may be emitted, so full coverage is reached
/// whenever `max_length ≥ source.len()`.
pub fn generate(lm: &NgramLM, source: &[Token], config: &GenerationConfig) -> Result<Generation> {
    config.validate()?;
    let mut extra: Vec<Token> = source
        .iter()
        .filter(|t| !lm.ids.contains_key(*t))
        .cloned()
        .collect();
    extra.sort();
    extra.dedup();
    let base = lm.vocab.len() as u32;
    let id_of = |t: &Token| {
        lm.ids
            .get(t)
            .copied()
            .unwrap_or_else(|| base + extra.binary_search(t).unwrap() as u32)
    };
    let mut remaining: Vec<u32> = source.iter().map(id_of).collect();
    remaining.sort_unstable();
    let search = Search { lm, extra };
    let end_id = 1u32;
    let bonus = config.coverage_bonus;

    let mut active = vec![Hypothesis {
        words: Vec::new(),
        remaining,
        covered: 0,
        score: 0.0,
    }];
    let mut finished: Vec<Hypothesis> = Vec::new();
    // in-vocabulary words (start marker excluded) plus out-of-vocabulary sources
    let open_vocab: Vec<u32> = (1..base).chain(base..base + search.extra.len() as u32).collect();

    while !active.is_empty() {
        let mut expansions: Vec<Hypothesis> = Vec::new();
        for hyp in &active {
            let scores = search.next_scores(&hyp.words);
            let word_score = |w: u32| -> f64 {
                if w < base {
                    scores[w as usize]
                } else {
                    lm.oov_floor
                }
            };
            let slots_left = config.max_length - hyp.words.len();
            let forced = !hyp.remaining.is_empty() && hyp.remaining.len() >= slots_left;
            let mut forced_words: Vec<u32> = hyp.remaining.clone();
            forced_words.dedup();
            let candidates: &[u32] = if forced { &forced_words } else { &open_vocab };
            for &w in candidates {
                if w == end_id {
                    if hyp.remaining.is_empty() && !hyp.words.is_empty() {
                        let mut done = hyp.clone();
                        done.score += word_score(w).ln();
                        finished.push(done);
                    }
                    continue;
                }
                let mut next = Hypothesis {
                    words: hyp.words.clone(),
                    remaining: hyp.remaining.clone(),
                    covered: hyp.covered,
                    score: hyp.score + word_score(w).ln(),
                };
                next.words.push(w);
                if let Ok(pos) = next.remaining.binary_search(&w) {
                    next.remaining.remove(pos);
                    next.covered += 1;
                    next.score += bonus;
                }
                if next.words.len() == config.max_length {
                    let end = search.next_scores(&next.words)[end_id as usize];
                    next.score += end.ln();
                    finished.push(next);
                } else {
                    expansions.push(next);
                }
            }
        }
        expansions.sort_by(|a, b| search.rank(a, b));
        expansions.truncate(config.beam_width);
        active = expansions;

        // log-scores only decrease; the bonus is the only possible gain
        let best_done = finished
            .iter()
            .filter(|h| h.remaining.is_empty())
            .map(|h| h.score)
            .fold(f64::NEG_INFINITY, f64::max);
        let best_open = active
            .iter()
            .map(|h| h.score + bonus * h.remaining.len() as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        if best_done >= best_open {
            break;
        }
    }

    let best = finished
        .iter()
        .min_by(|a, b| search.final_rank(a, b))
        .expect("max_length >= 1 always finishes at least one hypothesis");
    Ok(Generation {
        tokens: best.words.iter().map(|&w| search.surface(w).clone()).collect(),
        score: best.score,
        full_coverage: best.remaining.is_empty(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlindCaption {
    pub source: Vec<Token>,
    pub generation: Generation,
}

/// Both sides of the system-versus-blind comparison.
#[derive(Clone, Debug)]
pub struct BlindOutcome<T> {
    pub system: PrecisionReport<T>,
    pub blind: PrecisionReport<T>,
    pub generated: BTreeMap<String, BlindCaption>,
}

impl<T: Scalar> BlindOutcome<T> {
    pub fn table(&self) -> PrecisionTable {
        report_table(&[("system", &self.system), ("blind", &self.blind)])
            .expect("two rows are always present")
    }

    /// System minus blind P-n, in percentage points.
    pub fn gap(&self) -> Vec<f64> {
        self.system
            .precisions()
            .iter()
            .zip(self.blind.precisions())
            .map(|(s, b)| (s.to_f64_lossy() - b.to_f64_lossy()) * 100.0)
            .collect()
    }

    /// `id<TAB>source<TAB>caption` per id.
    pub fn generated_tsv(&self) -> String {
        let mut out = String::new();
        for (id, gen) in &self.generated {
            out.push_str(&format!(
                "{id}\t{}\t{}\n",
                detokenize(&gen.source),
                detokenize(&gen.generation.tokens)
            ));
        }
        out
    }
}

/// Tag each system caption, shuffle its nouns, generate a caption from them,
/// and score system and generated captions against the same references.
pub fn blind_pipeline<T: Scalar, G: CaptionGenerator>(
    system_captions: &BTreeMap<String, Caption>,
    references: &BTreeMap<String, Vec<Caption>>,
    tagger: &TaggerModel,
    generator: &G,
    seed: u64,
    max_order: usize,
) -> Result<BlindOutcome<T>> {
    let missing: Vec<String> = system_captions
        .keys()
        .filter(|id| references.get(*id).is_none_or(Vec::is_empty))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingReferences(missing));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources: Vec<(&String, Vec<Token>)> = system_captions
        .iter()
        .map(|(id, caption)| {
            let mut nouns = extract_category(&tagger.tag(caption), CoarseCategory::Noun);
            nouns.shuffle(&mut rng);
            (id, nouns)
        })
        .collect();
    let generated: BTreeMap<String, BlindCaption> = sources
        .into_par_iter()
        .map(|(id, source)| {
            let generation = generator.generate(&source)?;
            Ok((id.clone(), BlindCaption { source, generation }))
        })
        .collect::<Result<_>>()?;

    let blind_captions: Vec<Caption> = generated
        .iter()
        .map(|(id, g)| Caption::new(id.clone(), g.generation.tokens.clone()))
        .collect();
    let system_pairs: Vec<(&Caption, &[Caption])> = system_captions
        .iter()
        .map(|(id, c)| (c, references[id].as_slice()))
        .collect();
    let blind_pairs: Vec<(&Caption, &[Caption])> = blind_captions
        .iter()
        .map(|c| (c, references[&c.example_id].as_slice()))
        .collect();
    Ok(BlindOutcome {
        system: precision_of_pairs(&system_pairs, max_order)?,
        blind: precision_of_pairs(&blind_pairs, max_order)?,
        generated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::postag::FineTag;

    fn cap(text: &str) -> Caption {
        Caption::from_text("c", text, TokenizeConfig::default())
    }

    fn tok(s: &str) -> Token {
        Token::new(s).unwrap()
    }

    fn toks(s: &str) -> Vec<Token> {
        tokenize(s, TokenizeConfig::default())
    }

    fn words(tokens: &[Token]) -> String {
        detokenize(tokens)
    }

    #[test]
    fn pairs_permute_nouns() {
        let tagged = TaggedCaption::new(
            cap("A woman sitting at a table eating a plate of food"),
            ["DT", "NN", "VBG", "IN", "DT", "NN", "VBG", "DT", "NN", "IN", "NN"]
                .iter()
                .map(|l| FineTag::parse(l).unwrap())
                .collect(),
            "m",
        )
        .unwrap();
        let none = TaggedCaption::new(
            cap("it is"),
            vec![FineTag::parse("PRP").unwrap(), FineTag::parse("VBZ").unwrap()],
            "m",
        )
        .unwrap();
        let pairs = build_pairs(&[tagged.clone(), none], 3, 11).unwrap();
        assert_eq!(pairs.len(), 6);
        for pair in &pairs[..3] {
            let mut got: Vec<_> = pair.source.iter().map(Token::as_str).collect();
            got.sort();
            assert_eq!(got, ["food", "plate", "table", "woman"]);
            assert_eq!(pair.target, tagged.caption);
        }
        assert!(pairs[3..].iter().all(|p| p.source.is_empty()));
        assert_eq!(build_pairs(std::slice::from_ref(&tagged), 3, 11).unwrap(), pairs[..3]);
        assert!(build_pairs(&[tagged], 0, 1).is_err());
    }

    #[test]
    fn pair_file_round_trip() {
        let pairs = vec![
            NounPair {
                source: toks("plate food table woman"),
                target: Caption::new("pair-1", toks("a woman sitting at a table")),
            },
            NounPair {
                source: vec![],
                target: Caption::new("pair-2", toks("it is raining")),
            },
        ];
        assert_eq!(parse_pairs(&write_pairs(&pairs)).unwrap(), pairs);
        assert!(parse_pairs("no tab here").is_err());
    }

    #[test]
    fn lm_count_ratios() {
        let lm = train_lm(&[cap("a dog runs")], 3).unwrap();
        assert_eq!(lm.score(&toks("a"), &tok("dog")), 1.0);
        assert_eq!(lm.score(&toks("a dog"), &tok("runs")), 1.0);
        assert_eq!(lm.score(&toks("a dog runs"), lm.end_token()), 1.0);
        let unseen = lm.score(&toks("a dog"), &tok("zebra"));
        assert!(unseen > 0.0 && unseen.is_finite());
        // tokens + one end marker
        assert_eq!(lm.unigram_total(), 4);
        assert!(train_lm(&[], 3).is_err());
        assert!(train_lm(&[cap("a")], 0).is_err());
    }

    #[test]
    fn lm_backoff_values() {
        let lm = train_lm(&[cap("a dog runs"), cap("a cat runs")], 3).unwrap();
        // trigram (<s> a) → dog seen once of twice
        assert_eq!(lm.score(&toks("a"), &tok("dog")), 0.5);
        // "cat dog" unseen at all orders above unigrams: α² (1+1)/(N+V)
        // N = 6 tokens + 2 ends = 8, V = {a, dog, cat, runs, </s>} = 5
        let expected = 0.4 * 0.4 * 2.0 / 13.0;
        assert!((lm.score(&toks("cat"), &tok("dog")) - expected).abs() < 1e-15);
        // bigram (dog) → runs: trigram (cat dog) missing, bigram hit ⇒ α · 1
        assert!((lm.score(&toks("cat dog"), &tok("runs")) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn lm_json_round_trip() {
        let lm = train_lm(&[cap("a dog runs"), cap("a cat sleeps on a mat")], 3).unwrap();
        let json = lm.to_json();
        let back = NgramLM::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json);
        for ctx in ["", "a", "a dog", "on a", "zebra"] {
            for w in ["a", "dog", "mat", "</s>", "zebra"] {
                assert_eq!(back.score(&toks(ctx), &tok(w)), lm.score(&toks(ctx), &tok(w)));
            }
        }
        assert!(NgramLM::from_json(r#"{"order": 2}"#).is_err());
        assert!(lm.clone().with_backoff(0.0).is_err());
        assert_eq!(lm.with_backoff(1.0).unwrap().backoff_factor(), 1.0);
    }

    #[test]
    fn generation_fixture() {
        let corpus: Vec<Caption> = (0..100).map(|_| cap("a dog runs")).collect();
        let lm = train_lm(&corpus, 3).unwrap();
        let cfg = GenerationConfig::default();
        let out = generate(&lm, &toks("dog"), &cfg).unwrap();
        assert_eq!(words(&out.tokens), "a dog runs");
        assert!(out.full_coverage);

        let free = generate(&lm, &[], &cfg).unwrap();
        assert_eq!(words(&free.tokens), "a dog runs");

        let oov = generate(&lm, &toks("zebra"), &cfg).unwrap();
        assert!(oov.tokens.contains(&tok("zebra")), "{}", words(&oov.tokens));
        assert!(oov.full_coverage);
    }

    #[test]
    fn generation_rejects_bad_config() {
        let lm = train_lm(&[cap("a dog runs")], 2).unwrap();
        let cfg = GenerationConfig {
            beam_width: 0,
            ..GenerationConfig::default()
        };
        assert!(matches!(generate(&lm, &[], &cfg), Err(Error::InvalidArgument(_))));
        assert!(BeamGenerator::new(&lm, cfg).is_err());
    }

    #[test]
    fn too_short_budget_degrades() {
        let lm = train_lm(&[cap("a dog and a cat")], 2).unwrap();
        let cfg = GenerationConfig {
            max_length: 2,
            ..GenerationConfig::default()
        };
        let out = generate(&lm, &toks("dog cat horse"), &cfg).unwrap();
        assert!(out.degraded());
        assert_eq!(out.tokens.len(), 2);
        let exact = GenerationConfig {
            max_length: 3,
            ..GenerationConfig::default()
        };
        let out = generate(&lm, &toks("dog cat horse"), &exact).unwrap();
        assert!(out.full_coverage);
        let mut sorted = out.tokens.clone();
        sorted.sort();
        assert_eq!(words(&sorted), "cat dog horse");
    }

    #[test]
    fn duplicate_source_nouns_are_each_covered() {
        let lm = train_lm(&[cap("a dog and a dog"), cap("a dog runs")], 3).unwrap();
        let out = generate(&lm, &toks("dog dog"), &GenerationConfig::default()).unwrap();
        let dogs = out.tokens.iter().filter(|t| t.as_str() == "dog").count();
        assert!(dogs >= 2, "{}", words(&out.tokens));
    }
}
