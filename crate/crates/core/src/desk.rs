//! The small caption corpus bundled with the crate.
//!
//! * `TAGGED_CONLL`: hand-tagged caption-like sentences (`word<TAB>tag`).
//! * `SYSTEM_RESULTS_JSON`: one system caption per image, results layout.
//! * `REFERENCES_JSON`: five reference captions per image, annotations layout.
//! * `TRAIN_CAPTIONS_TSV`: captions of other images for language-model training.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::postag::{parse_conll, TaggedSentence};
use crate::text::{parse_annotations_json, parse_results_json, parse_tsv, Caption, TokenizeConfig};

pub const TAGGED_CONLL: &str = include_str!("../data/desk/tagged.conll");
pub const SYSTEM_RESULTS_JSON: &str = include_str!("../data/desk/system_results.json");
pub const REFERENCES_JSON: &str = include_str!("../data/desk/references.json");
pub const TRAIN_CAPTIONS_TSV: &str = include_str!("../data/desk/train_captions.tsv");

/// Every fifth sentence of the tagged corpus is held out.
pub const HELD_OUT_STRIDE: usize = 5;

pub fn tagged_sentences() -> Vec<TaggedSentence> {
    parse_conll(TAGGED_CONLL).expect("bundled CoNLL parses")
}

/// `(train, held_out)`; sentence `i` is held out when `i % 5 == 4`.
pub fn tagged_split() -> (Vec<TaggedSentence>, Vec<TaggedSentence>) {
    let (held, train): (Vec<_>, Vec<_>) = tagged_sentences()
        .into_iter()
        .enumerate()
        .partition(|(i, _)| i % HELD_OUT_STRIDE == HELD_OUT_STRIDE - 1);
    (
        train.into_iter().map(|(_, s)| s).collect(),
        held.into_iter().map(|(_, s)| s).collect(),
    )
}

pub fn system_captions() -> Result<BTreeMap<String, Caption>> {
    parse_results_json(SYSTEM_RESULTS_JSON, TokenizeConfig::default())
}

pub fn references() -> Result<BTreeMap<String, Vec<Caption>>> {
    parse_annotations_json(REFERENCES_JSON, TokenizeConfig::default())
}

pub fn training_captions() -> Result<Vec<Caption>> {
    Ok(parse_tsv(TRAIN_CAPTIONS_TSV, TokenizeConfig::default())?
        .into_values()
        .flatten()
        .collect())
}
