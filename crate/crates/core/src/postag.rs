//! Greedy averaged-perceptron part-of-speech tagger and the fine-to-coarse
//! category map used by the masking analysis.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::text::{Caption, Token};

/// Penn Treebank tagset, including punctuation and bracket tags.
pub const PENN_TAGS: [&str; 45] = [
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN", "NNS", "NNP",
    "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM", "TO", "UH", "VB",
    "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT", "WP", "WP$", "WRB", "#", "$", ".", ",", ":", "``",
    "''", "-LRB-", "-RRB-",
];

const MIN_LEXICON_COUNT: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FineTag(&'static str);

impl FineTag {
    pub fn parse(label: &str) -> Result<Self> {
        PENN_TAGS
            .iter()
            .find(|t| **t == label)
            .map(|t| FineTag(t))
            .ok_or_else(|| Error::UnknownTag(label.to_owned()))
    }

    pub fn label(self) -> &'static str {
        self.0
    }

    pub fn category(self) -> CoarseCategory {
        use CoarseCategory::*;
        match self.0 {
            "NN" | "NNS" | "NNP" | "NNPS" => Noun,
            "VB" | "VBD" | "VBG" | "VBN" | "VBP" | "VBZ" => Verb,
            "JJ" | "JJR" | "JJS" => Adj,
            "RB" | "RBR" | "RBS" => Adv,
            "IN" | "TO" => Prep,
            "DT" | "PDT" | "WDT" => Det,
            "PRP" | "PRP$" | "WP" | "WP$" => Pron,
            "CC" => Conj,
            "CD" => Num,
            _ => Other,
        }
    }
}

impl fmt::Display for FineTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CoarseCategory {
    Noun,
    Verb,
    Adj,
    Adv,
    Prep,
    Det,
    Pron,
    Conj,
    Num,
    Other,
}

impl CoarseCategory {
    pub const ALL: [CoarseCategory; 10] = [
        CoarseCategory::Noun,
        CoarseCategory::Verb,
        CoarseCategory::Adj,
        CoarseCategory::Adv,
        CoarseCategory::Prep,
        CoarseCategory::Det,
        CoarseCategory::Pron,
        CoarseCategory::Conj,
        CoarseCategory::Num,
        CoarseCategory::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CoarseCategory::Noun => "NOUN",
            CoarseCategory::Verb => "VERB",
            CoarseCategory::Adj => "ADJ",
            CoarseCategory::Adv => "ADV",
            CoarseCategory::Prep => "PREP",
            CoarseCategory::Det => "DET",
            CoarseCategory::Pron => "PRON",
            CoarseCategory::Conj => "CONJ",
            CoarseCategory::Num => "NUM",
            CoarseCategory::Other => "OTHER",
        }
    }
}

impl fmt::Display for CoarseCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoarseCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.to_ascii_uppercase();
        CoarseCategory::ALL
            .into_iter()
            .find(|c| c.name() == upper)
            .ok_or_else(|| Error::UnknownCategory {
                given: s.to_owned(),
                valid: CoarseCategory::ALL.iter().map(|c| c.name()).collect(),
            })
    }
}

/// A caption with one fine tag per token, stamped with the id of the model
/// that produced the tags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedCaption {
    pub caption: Caption,
    pub tags: Vec<FineTag>,
    pub model_id: String,
}

impl TaggedCaption {
    pub fn new(caption: Caption, tags: Vec<FineTag>, model_id: impl Into<String>) -> Result<Self> {
        if caption.len() != tags.len() {
            return Err(Error::InvalidArgument(format!(
                "caption {:?} has {} tokens but {} tags",
                caption.example_id,
                caption.len(),
                tags.len()
            )));
        }
        Ok(TaggedCaption {
            caption,
            tags,
            model_id: model_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.caption.tokens
    }

    pub fn categories(&self) -> impl Iterator<Item = CoarseCategory> + '_ {
        self.tags.iter().map(|t| t.category())
    }
}

/// Tokens of `category`, in sentence order with duplicates kept.
pub fn extract_category(tagged: &TaggedCaption, category: CoarseCategory) -> Vec<Token> {
    tagged
        .tokens()
        .iter()
        .zip(tagged.categories())
        .filter(|(_, c)| *c == category)
        .map(|(t, _)| t.clone())
        .collect()
}

/// One training sentence as `(word, tag label)` pairs.
pub type TaggedSentence = Vec<(String, String)>;

/// Read `word<TAB>tag` lines with blank lines separating sentences.
pub fn parse_conll(text: &str) -> Result<Vec<TaggedSentence>> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let (word, tag) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: "<conll>".into(),
            line: lineno + 1,
            message: "expected word<TAB>tag".into(),
        })?;
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(Error::Parse {
                path: "<conll>".into(),
                line: lineno + 1,
                message: format!("invalid word {word:?}"),
            });
        }
        current.push((word.to_owned(), tag.trim().to_owned()));
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

pub fn write_conll<'a>(captions: impl IntoIterator<Item = &'a TaggedCaption>) -> String {
    let mut out = String::new();
    for tagged in captions {
        for (token, tag) in tagged.tokens().iter().zip(&tagged.tags) {
            out.push_str(token.as_str());
            out.push('\t');
            out.push_str(tag.label());
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub epochs: usize,
    pub seed: u64,
    pub training_size: usize,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    feature_weights: BTreeMap<String, BTreeMap<String, f64>>,
    tag_set: Vec<String>,
    lexicon: BTreeMap<String, String>,
    metadata: TrainingMetadata,
}

/// A trained tagger. Immutable once built; `tag` takes `&self`.
#[derive(Clone, Debug)]
pub struct TaggerModel {
    tag_set: Vec<FineTag>,
    weights: HashMap<String, Vec<f64>>,
    lexicon: HashMap<String, FineTag>,
    metadata: TrainingMetadata,
    id: String,
}

const START: &str = "-START-";
const START2: &str = "-START2-";
const END: &str = "-END-";

fn features(words: &[&str], i: usize, prev: &str, prev2: &str) -> Vec<String> {
    let word = words[i];
    let lower = word.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let suffix = |k: usize| chars[chars.len().saturating_sub(k)..].iter().collect::<String>();
    let prefix: String = chars.iter().take(1).collect();
    let prev_word = if i == 0 { START } else { words[i - 1] };
    let next_word = words.get(i + 1).copied().unwrap_or(END);

    let mut feats = vec![
        "bias".to_owned(),
        format!("w={word}"),
        format!("lw={lower}"),
        format!("s1={}", suffix(1)),
        format!("s2={}", suffix(2)),
        format!("s3={}", suffix(3)),
        format!("p1={prefix}"),
        format!("t-1={prev}"),
        format!("t-2,t-1={prev2},{prev}"),
        format!("w-1={}", prev_word.to_lowercase()),
        format!("w+1={}", next_word.to_lowercase()),
    ];
    if word.chars().next().is_some_and(char::is_uppercase) {
        feats.push("cap".to_owned());
    }
    if word.chars().any(|c| c.is_ascii_digit()) {
        feats.push("digit".to_owned());
    }
    feats
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

struct Trainer {
    tags: usize,
    weights: HashMap<String, Vec<f64>>,
    totals: HashMap<String, Vec<f64>>,
    stamps: HashMap<String, Vec<u64>>,
    instances: u64,
}

impl Trainer {
    fn scores(&self, feats: &[String]) -> Vec<f64> {
        let mut scores = vec![0.0; self.tags];
        for f in feats {
            if let Some(w) = self.weights.get(f) {
                for (s, w) in scores.iter_mut().zip(w) {
                    *s += w;
                }
            }
        }
        scores
    }

    fn bump(&mut self, feat: &str, tag: usize, delta: f64) {
        let n = self.tags;
        let w = self.weights.entry(feat.to_owned()).or_insert_with(|| vec![0.0; n]);
        let total = self.totals.entry(feat.to_owned()).or_insert_with(|| vec![0.0; n]);
        let stamp = self.stamps.entry(feat.to_owned()).or_insert_with(|| vec![0; n]);
        total[tag] += (self.instances - stamp[tag]) as f64 * w[tag];
        stamp[tag] = self.instances;
        w[tag] += delta;
    }

    fn update(&mut self, truth: usize, guess: usize, feats: &[String]) {
        self.instances += 1;
        if truth == guess {
            return;
        }
        for f in feats {
            self.bump(f, truth, 1.0);
            self.bump(f, guess, -1.0);
        }
    }

    fn averaged(self) -> HashMap<String, Vec<f64>> {
        let instances = self.instances.max(1);
        let mut out = HashMap::with_capacity(self.weights.len());
        for (feat, w) in self.weights {
            let total = &self.totals[&feat];
            let stamp = &self.stamps[&feat];
            let avg: Vec<f64> = (0..self.tags)
                .map(|t| (total[t] + (instances - stamp[t]) as f64 * w[t]) / instances as f64)
                .collect();
            if avg.iter().any(|&x| x != 0.0) {
                out.insert(feat, avg);
            }
        }
        out
    }
}

/// Train a tagger. Sentence order is reshuffled every epoch by a generator
/// seeded from `seed`, so identical inputs give an identical model.
pub fn train_tagger(corpus: &[TaggedSentence], epochs: usize, seed: u64) -> Result<TaggerModel> {
    if corpus.is_empty() || corpus.iter().all(Vec::is_empty) {
        return Err(Error::InvalidArgument("training corpus is empty".into()));
    }
    if epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be at least 1".into()));
    }

    let mut parsed: Vec<(Vec<&str>, Vec<FineTag>)> = Vec::with_capacity(corpus.len());
    let mut seen_tags = Vec::new();
    let mut word_tags: HashMap<&str, BTreeMap<FineTag, usize>> = HashMap::new();
    for sentence in corpus {
        let mut words = Vec::with_capacity(sentence.len());
        let mut tags = Vec::with_capacity(sentence.len());
        for (word, label) in sentence {
            let tag = FineTag::parse(label)?;
            if !seen_tags.contains(&tag) {
                seen_tags.push(tag);
            }
            *word_tags.entry(word).or_default().entry(tag).or_insert(0) += 1;
            words.push(word.as_str());
            tags.push(tag);
        }
        parsed.push((words, tags));
    }
    seen_tags.sort();
    let tag_index: HashMap<FineTag, usize> =
        seen_tags.iter().enumerate().map(|(i, t)| (*t, i)).collect();

    let lexicon: HashMap<String, FineTag> = word_tags
        .iter()
        .filter(|(_, tags)| tags.len() == 1 && tags.values().sum::<usize>() >= MIN_LEXICON_COUNT)
        .map(|(w, tags)| ((*w).to_owned(), *tags.keys().next().unwrap()))
        .collect();

    let mut trainer = Trainer {
        tags: seen_tags.len(),
        weights: HashMap::new(),
        totals: HashMap::new(),
        stamps: HashMap::new(),
        instances: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..parsed.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &s in &order {
            let (words, gold) = &parsed[s];
            let mut prev = START.to_owned();
            let mut prev2 = START2.to_owned();
            for i in 0..words.len() {
                let guess = match lexicon.get(words[i]) {
                    Some(tag) => tag_index[tag],
                    None => {
                        let feats = features(words, i, &prev, &prev2);
                        let guess = argmax(&trainer.scores(&feats));
                        trainer.update(tag_index[&gold[i]], guess, &feats);
                        guess
                    }
                };
                prev2 = std::mem::replace(&mut prev, seen_tags[guess].label().to_owned());
            }
        }
    }

    let metadata = TrainingMetadata {
        epochs,
        seed,
        training_size: corpus.len(),
    };
    Ok(TaggerModel::assemble(seen_tags, trainer.averaged(), lexicon, metadata))
}

impl TaggerModel {
    fn assemble(
        tag_set: Vec<FineTag>,
        weights: HashMap<String, Vec<f64>>,
        lexicon: HashMap<String, FineTag>,
        metadata: TrainingMetadata,
    ) -> Self {
        let mut model = TaggerModel {
            tag_set,
            weights,
            lexicon,
            metadata,
            id: String::new(),
        };
        let digest = Sha256::digest(model.to_json().as_bytes());
        model.id = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        model
    }

    /// Short content hash of the serialized model.
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tag_set(&self) -> &[FineTag] {
        &self.tag_set
    }

    pub fn metadata(&self) -> &TrainingMetadata {
        &self.metadata
    }

    pub fn lexicon_tag(&self, word: &str) -> Option<FineTag> {
        self.lexicon.get(word).copied()
    }

    /// Weights as (feature, tag) → value, zeros omitted.
    pub fn feature_weights(&self) -> BTreeMap<String, BTreeMap<String, f64>> {
        self.weights
            .iter()
            .map(|(feat, w)| {
                let per_tag = self
                    .tag_set
                    .iter()
                    .zip(w)
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(t, &v)| (t.label().to_owned(), v))
                    .collect();
                (feat.clone(), per_tag)
            })
            .collect()
    }

    pub fn tag_words(&self, words: &[&str]) -> Vec<FineTag> {
        let mut out = Vec::with_capacity(words.len());
        let mut prev = START.to_owned();
        let mut prev2 = START2.to_owned();
        let mut scores = vec![0.0; self.tag_set.len()];
        for i in 0..words.len() {
            let tag = match self.lexicon.get(words[i]) {
                Some(tag) => *tag,
                None => {
                    scores.iter_mut().for_each(|s| *s = 0.0);
                    for f in features(words, i, &prev, &prev2) {
                        if let Some(w) = self.weights.get(&f) {
                            for (s, w) in scores.iter_mut().zip(w) {
                                *s += w;
                            }
                        }
                    }
                    self.tag_set[argmax(&scores)]
                }
            };
            prev2 = std::mem::replace(&mut prev, tag.label().to_owned());
            out.push(tag);
        }
        out
    }

    pub fn tag(&self, caption: &Caption) -> TaggedCaption {
        let words: Vec<&str> = caption.tokens.iter().map(Token::as_str).collect();
        TaggedCaption {
            tags: self.tag_words(&words),
            caption: caption.clone(),
            model_id: self.id.clone(),
        }
    }

    /// Fraction of tokens in `sentences` whose predicted tag equals the gold tag.
    pub fn accuracy(&self, sentences: &[TaggedSentence]) -> f64 {
        let mut correct = 0usize;
        let mut total = 0usize;
        for sentence in sentences {
            let words: Vec<&str> = sentence.iter().map(|(w, _)| w.as_str()).collect();
            for (pred, (_, gold)) in self.tag_words(&words).iter().zip(sentence) {
                total += 1;
                correct += usize::from(pred.label() == gold);
            }
        }
        if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        }
    }

    /// Serialize as a single JSON document with sorted keys.
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            feature_weights: self.feature_weights(),
            tag_set: self.tag_set.iter().map(|t| t.label().to_owned()).collect(),
            lexicon: self
                .lexicon
                .iter()
                .map(|(w, t)| (w.clone(), t.label().to_owned()))
                .collect(),
            metadata: self.metadata.clone(),
        };
        let value = serde_json::to_value(&file).expect("model serializes");
        crate::report::to_sorted_json(&value)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::json("<model>", e))?;
        let tag_set = file
            .tag_set
            .iter()
            .map(|t| FineTag::parse(t))
            .collect::<Result<Vec<_>>>()?;
        if tag_set.is_empty() {
            return Err(Error::InvalidModel("empty tag set".into()));
        }
        let index: HashMap<&str, usize> =
            tag_set.iter().enumerate().map(|(i, t)| (t.label(), i)).collect();
        let mut weights = HashMap::with_capacity(file.feature_weights.len());
        for (feat, per_tag) in file.feature_weights {
            let mut dense = vec![0.0; tag_set.len()];
            for (label, value) in per_tag {
                let slot = index.get(label.as_str()).ok_or_else(|| {
                    Error::InvalidModel(format!("weight for tag {label:?} outside the tag set"))
                })?;
                if !value.is_finite() {
                    return Err(Error::InvalidModel(format!("non-finite weight for {feat:?}")));
                }
                dense[*slot] = value;
            }
            weights.insert(feat, dense);
        }
        let lexicon = file
            .lexicon
            .into_iter()
            .map(|(w, t)| FineTag::parse(&t).map(|t| (w, t)))
            .collect::<Result<HashMap<_, _>>>()?;
        Ok(TaggerModel::assemble(tag_set, weights, lexicon, file.metadata))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::TokenizeConfig;

    fn sentence(text: &str) -> TaggedSentence {
        text.split_whitespace()
            .map(|pair| {
                let (w, t) = pair.rsplit_once('/').unwrap();
                (w.to_owned(), t.to_owned())
            })
            .collect()
    }

    fn cap(text: &str) -> Caption {
        Caption::from_text("x", text, TokenizeConfig::default())
    }

    #[test]
    fn coarse_map_is_total() {
        for label in PENN_TAGS {
            let tag = FineTag::parse(label).unwrap();
            assert!(CoarseCategory::ALL.contains(&tag.category()));
        }
        let cat = |l: &str| FineTag::parse(l).unwrap().category();
        assert_eq!(cat("NNPS"), CoarseCategory::Noun);
        assert_eq!(cat("VBN"), CoarseCategory::Verb);
        assert_eq!(cat("TO"), CoarseCategory::Prep);
        assert_eq!(cat("WDT"), CoarseCategory::Det);
        assert_eq!(cat("PRP$"), CoarseCategory::Pron);
        assert_eq!(cat("CD"), CoarseCategory::Num);
        assert_eq!(cat("MD"), CoarseCategory::Other);
        assert_eq!(cat("."), CoarseCategory::Other);
        assert!(matches!(FineTag::parse("XX"), Err(Error::UnknownTag(t)) if t == "XX"));
    }

    #[test]
    fn category_names_parse() {
        for c in CoarseCategory::ALL {
            assert_eq!(c.name().parse::<CoarseCategory>().unwrap(), c);
        }
        assert_eq!("noun".parse::<CoarseCategory>().unwrap(), CoarseCategory::Noun);
        match "XYZ".parse::<CoarseCategory>() {
            Err(Error::UnknownCategory { valid, .. }) => assert_eq!(valid.len(), 10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_sentence_fit() {
        let corpus = vec![sentence("the/DT dog/NN runs/VBZ")];
        let model = train_tagger(&corpus, 5, 1).unwrap();
        let tagged = model.tag(&cap("the dog runs"));
        let labels: Vec<_> = tagged.tags.iter().map(|t| t.label()).collect();
        assert_eq!(labels, ["DT", "NN", "VBZ"]);
        let cats: Vec<_> = tagged.categories().collect();
        assert_eq!(
            cats,
            [CoarseCategory::Det, CoarseCategory::Noun, CoarseCategory::Verb]
        );
    }

    #[test]
    fn training_is_deterministic() {
        let corpus = vec![
            sentence("the/DT dog/NN runs/VBZ"),
            sentence("a/DT cat/NN sleeps/VBZ on/IN the/DT bed/NN"),
        ];
        let a = train_tagger(&corpus, 1, 7).unwrap();
        let b = train_tagger(&corpus, 1, 7).unwrap();
        assert_eq!(a.feature_weights(), b.feature_weights());
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.id(), b.id());
    }

    #[test]
    fn training_errors() {
        assert!(matches!(train_tagger(&[], 5, 1), Err(Error::InvalidArgument(_))));
        let bad = vec![sentence("the/DT dog/NOUN")];
        assert!(matches!(train_tagger(&bad, 5, 1), Err(Error::UnknownTag(t)) if t == "NOUN"));
        let ok = vec![sentence("the/DT dog/NN")];
        assert!(train_tagger(&ok, 0, 1).is_err());
    }

    #[test]
    fn lexicon_needs_five_unambiguous_sightings() {
        let mut corpus: Vec<TaggedSentence> =
            (0..5).map(|_| sentence("the/DT dog/NN runs/VBZ")).collect();
        corpus.push(sentence("dogs/NNS runs/NNS"));
        let model = train_tagger(&corpus, 3, 0).unwrap();
        assert_eq!(model.lexicon_tag("the"), Some(FineTag::parse("DT").unwrap()));
        assert_eq!(model.lexicon_tag("dog"), Some(FineTag::parse("NN").unwrap()));
        assert_eq!(model.lexicon_tag("runs"), None);
        assert_eq!(model.lexicon_tag("dogs"), None);

        let tagged = model.tag(&cap("the"));
        assert_eq!(tagged.tags[0].label(), "DT");
        assert_eq!(tagged.tags[0].category(), CoarseCategory::Det);
    }

    #[test]
    fn empty_caption_tags_empty() {
        let model = train_tagger(&[sentence("the/DT dog/NN")], 2, 0).unwrap();
        assert!(model.tag(&Caption::new("e", vec![])).is_empty());
    }

    #[test]
    fn json_round_trip_preserves_behaviour() {
        let corpus = vec![
            sentence("a/DT man/NN riding/VBG a/DT horse/NN"),
            sentence("two/CD dogs/NNS playing/VBG in/IN the/DT snow/NN"),
        ];
        let model = train_tagger(&corpus, 4, 3).unwrap();
        let json = model.to_json();
        let reloaded = TaggerModel::from_json(&json).unwrap();
        assert_eq!(reloaded.to_json(), json);
        assert_eq!(reloaded.id(), model.id());
        let c = cap("a dog riding in the horse");
        assert_eq!(reloaded.tag(&c), model.tag(&c));
        assert!(TaggerModel::from_json("{}").is_err());
    }

    #[test]
    fn extraction() {
        let tagged = |text: &str, labels: &[&str]| {
            TaggedCaption::new(
                cap(text),
                labels.iter().map(|l| FineTag::parse(l).unwrap()).collect(),
                "m",
            )
            .unwrap()
        };
        let woman = tagged(
            "a woman sitting at a table eating a plate of food",
            &["DT", "NN", "VBG", "IN", "DT", "NN", "VBG", "DT", "NN", "IN", "NN"],
        );
        let nouns: Vec<String> = extract_category(&woman, CoarseCategory::Noun)
            .iter()
            .map(|t| t.to_string())
            .collect();
        assert_eq!(nouns, ["woman", "table", "plate", "food"]);
        assert!(extract_category(&woman, CoarseCategory::Conj).is_empty());

        let dogs = tagged("a dog and a dog", &["DT", "NN", "CC", "DT", "NN"]);
        let nouns: Vec<String> = extract_category(&dogs, CoarseCategory::Noun)
            .iter()
            .map(|t| t.to_string())
            .collect();
        assert_eq!(nouns, ["dog", "dog"]);

        let total: usize = CoarseCategory::ALL
            .iter()
            .map(|c| extract_category(&woman, *c).len())
            .sum();
        assert_eq!(total, woman.len());

        assert!(TaggedCaption::new(cap("a b"), vec![], "m").is_err());
    }

    #[test]
    fn conll_parsing() {
        let text = "the\tDT\ndog\tNN\n\n\ncat\tNN\r\n";
        let sents = parse_conll(text).unwrap();
        assert_eq!(sents.len(), 2);
        assert_eq!(sents[0][1], ("dog".to_owned(), "NN".to_owned()));
        assert!(parse_conll("nodelimiter\n").is_err());
        assert!(parse_conll("").unwrap().is_empty());
    }
}
