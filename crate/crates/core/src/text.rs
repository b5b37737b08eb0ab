//! Tokens, captions, and the readers for the caption file formats.
//!
//! Three on-disk layouts are understood:
//!
//! * results JSON, an array of `{"image_id", "caption"}` records with one
//!   candidate per image;
//! * annotations JSON, `{"annotations": [{"image_id", "caption", ...}]}` with
//!   any number of reference captions per image;
//! * TSV, `id<TAB>caption` per line, repeated ids accumulating.
//!
//! Image ids are normalized to their decimal string form so that integer and
//! string ids from different files line up.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

const PUNCTUATION: [char; 10] = ['.', ',', ';', ':', '!', '?', '"', '\'', '(', ')'];

/// A single whitespace-free, non-empty word.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    pub fn new(surface: impl Into<String>) -> Result<Self> {
        let surface = surface.into();
        if surface.is_empty() {
            return Err(Error::InvalidArgument("token surface is empty".into()));
        }
        if surface.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!(
                "token {surface:?} contains whitespace"
            )));
        }
        Ok(Token(surface))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Token {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Token::new(value)
    }
}

impl From<Token> for String {
    fn from(token: Token) -> Self {
        token.0
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizeConfig {
    pub lowercase: bool,
    pub split_punct: bool,
}

impl Default for TokenizeConfig {
    fn default() -> Self {
        TokenizeConfig {
            lowercase: true,
            split_punct: true,
        }
    }
}

/// Split `text` on whitespace, optionally lowercasing and breaking
/// punctuation marks out into their own tokens.
pub fn tokenize(text: &str, config: TokenizeConfig) -> Vec<Token> {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let word = if config.lowercase {
            word.to_lowercase()
        } else {
            word.to_owned()
        };
        if !config.split_punct {
            tokens.push(Token(word));
            continue;
        }
        let mut current = String::new();
        for ch in word.chars() {
            if PUNCTUATION.contains(&ch) {
                if !current.is_empty() {
                    tokens.push(Token(std::mem::take(&mut current)));
                }
                tokens.push(Token(ch.to_string()));
            } else {
                current.push(ch);
            }
        }
        if !current.is_empty() {
            tokens.push(Token(current));
        }
    }
    tokens
}

/// Join tokens with single spaces.
pub fn detokenize(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, token) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(token.as_str());
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Caption {
    pub example_id: String,
    pub tokens: Vec<Token>,
}

impl Caption {
    pub fn new(example_id: impl Into<String>, tokens: Vec<Token>) -> Self {
        Caption {
            example_id: example_id.into(),
            tokens,
        }
    }

    pub fn from_text(example_id: impl Into<String>, text: &str, config: TokenizeConfig) -> Self {
        Caption::new(example_id, tokenize(text, config))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn text(&self) -> String {
        detokenize(&self.tokens)
    }
}

/// Candidate captions paired with their references, keyed by example id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    candidates: BTreeMap<String, Caption>,
    references: BTreeMap<String, Vec<Caption>>,
}

impl Corpus {
    /// Fails when a candidate id has no (or an empty list of) references.
    /// Reference ids without a candidate are kept but never scored.
    pub fn new(
        candidates: BTreeMap<String, Caption>,
        references: BTreeMap<String, Vec<Caption>>,
    ) -> Result<Self> {
        let missing: Vec<String> = candidates
            .keys()
            .filter(|id| references.get(*id).is_none_or(Vec::is_empty))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingReferences(missing));
        }
        Ok(Corpus {
            candidates,
            references,
        })
    }

    /// Build a corpus from `(candidate, references)` pairs; the candidate's
    /// example id keys the pair.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Caption, Vec<Caption>)>) -> Result<Self> {
        let mut candidates = BTreeMap::new();
        let mut references = BTreeMap::new();
        for (candidate, refs) in pairs {
            let id = candidate.example_id.clone();
            if candidates.insert(id.clone(), candidate).is_some() {
                return Err(Error::DuplicateId(id));
            }
            references.insert(id, refs);
        }
        Corpus::new(candidates, references)
    }

    pub fn candidates(&self) -> &BTreeMap<String, Caption> {
        &self.candidates
    }

    pub fn references(&self) -> &BTreeMap<String, Vec<Caption>> {
        &self.references
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Iterate `(candidate, references)` in example-id order.
    pub fn pairs(&self) -> impl Iterator<Item = (&Caption, &[Caption])> + '_ {
        self.candidates
            .iter()
            .map(move |(id, cand)| (cand, self.references[id].as_slice()))
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn normalize_id(value: &Value) -> Option<String> {
    match value {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn caption_from_record(
    record: &Value,
    index: usize,
    config: TokenizeConfig,
) -> Result<Caption> {
    let id = record
        .get("image_id")
        .and_then(normalize_id)
        .ok_or(Error::MissingField {
            index,
            field: "image_id",
        })?;
    let text = record
        .get("caption")
        .and_then(Value::as_str)
        .ok_or(Error::MissingField {
            index,
            field: "caption",
        })?;
    let caption = Caption::from_text(id, text, config);
    if caption.is_empty() {
        return Err(Error::EmptyCaption(caption.example_id));
    }
    Ok(caption)
}

/// Parse a results-style JSON document (one caption per image id).
pub fn parse_results_json(text: &str, config: TokenizeConfig) -> Result<BTreeMap<String, Caption>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::json("<results>", e))?;
    let records = value.as_array().ok_or_else(|| Error::Ingestion {
        path: "<results>".into(),
        message: "expected a JSON array of {image_id, caption} records".into(),
    })?;
    let mut out = BTreeMap::new();
    for (index, record) in records.iter().enumerate() {
        let caption = caption_from_record(record, index, config)?;
        let id = caption.example_id.clone();
        if out.insert(id.clone(), caption).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    Ok(out)
}

pub fn load_results_json(
    path: impl AsRef<Path>,
    config: TokenizeConfig,
) -> Result<BTreeMap<String, Caption>> {
    let path = path.as_ref();
    parse_results_json(&read_to_string(path)?, config).map_err(|e| with_path(e, path))
}

/// Parse an annotations-style JSON document, grouping captions by image id
/// in file order.
pub fn parse_annotations_json(
    text: &str,
    config: TokenizeConfig,
) -> Result<BTreeMap<String, Vec<Caption>>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::json("<annotations>", e))?;
    let records = value
        .get("annotations")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Ingestion {
            path: "<annotations>".into(),
            message: "missing \"annotations\" array".into(),
        })?;
    let mut out: BTreeMap<String, Vec<Caption>> = BTreeMap::new();
    for (index, record) in records.iter().enumerate() {
        let caption = caption_from_record(record, index, config)?;
        out.entry(caption.example_id.clone()).or_default().push(caption);
    }
    Ok(out)
}

pub fn load_annotations_json(
    path: impl AsRef<Path>,
    config: TokenizeConfig,
) -> Result<BTreeMap<String, Vec<Caption>>> {
    let path = path.as_ref();
    parse_annotations_json(&read_to_string(path)?, config).map_err(|e| with_path(e, path))
}

/// Parse `id<TAB>caption` lines. Blank lines are skipped; CRLF is accepted.
pub fn parse_tsv(text: &str, config: TokenizeConfig) -> Result<BTreeMap<String, Vec<Caption>>> {
    let mut out: BTreeMap<String, Vec<Caption>> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let (id, caption) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: "<tsv>".into(),
            line: lineno + 1,
            message: "expected id<TAB>caption".into(),
        })?;
        let caption = Caption::from_text(id, caption, config);
        if caption.is_empty() {
            return Err(Error::Parse {
                path: "<tsv>".into(),
                line: lineno + 1,
                message: format!("caption for {id:?} is empty"),
            });
        }
        out.entry(id.to_owned()).or_default().push(caption);
    }
    Ok(out)
}

pub fn load_tsv(
    path: impl AsRef<Path>,
    config: TokenizeConfig,
) -> Result<BTreeMap<String, Vec<Caption>>> {
    let path = path.as_ref();
    parse_tsv(&read_to_string(path)?, config).map_err(|e| with_path(e, path))
}

/// Serialize grouped captions as TSV, one line per caption in id order.
pub fn write_tsv<'a>(groups: impl IntoIterator<Item = (&'a String, &'a Vec<Caption>)>) -> String {
    let mut out = String::new();
    for (id, captions) in groups {
        for caption in captions {
            out.push_str(id);
            out.push('\t');
            out.push_str(&caption.text());
            out.push('\n');
        }
    }
    out
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Json { source, .. } => Error::json(path, source),
        Error::Ingestion { message, .. } => Error::Ingestion {
            path: path.into(),
            message,
        },
        Error::Parse { line, message, .. } => Error::Parse {
            path: path.into(),
            line,
            message,
        },
        other => other,
    }
}
