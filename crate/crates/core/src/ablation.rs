//! Word-category masking bounds.
//!
//! For a category such as NOUN, every token of that category is replaced by
//! a reserved mask token:
//!
//! * in the candidates only, which makes the category unmatchable and gives
//!   the **lower** bound (the system never gets the category right);
//! * in candidates and references alike, which makes every occurrence match
//!   and gives the **upper** bound (the system always gets it right).
//!
//! Masking replaces tokens one for one, so lengths and therefore the
//! brevity penalty are unchanged.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::metrics::{precision_of_pairs, PrecisionReport};
use crate::postag::{CoarseCategory, TaggedCaption, TaggerModel};
use crate::report::{csv_field, sig6, sig6_json, to_sorted_json};
use crate::scalar::Scalar;
use crate::text::{Caption, Corpus, Token};

pub const DEFAULT_MASK: &str = "⟨mask⟩";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MaskScope {
    CandidateOnly,
    CandidateAndReferences,
}

/// Replace each token of `category` with `mask`.
pub fn mask_category(tagged: &TaggedCaption, category: CoarseCategory, mask: &Token) -> Result<Caption> {
    if tagged.tokens().contains(mask) {
        return Err(Error::MaskCollision(mask.to_string()));
    }
    Ok(mask_unchecked(tagged, category, mask))
}

fn mask_unchecked(tagged: &TaggedCaption, category: CoarseCategory, mask: &Token) -> Caption {
    let tokens = tagged
        .tokens()
        .iter()
        .zip(tagged.categories())
        .map(|(t, c)| if c == category { mask.clone() } else { t.clone() })
        .collect();
    Caption::new(tagged.caption.example_id.clone(), tokens)
}

/// Candidates and references tagged by one shared model.
#[derive(Clone, Debug)]
pub struct TaggedCorpus {
    candidates: BTreeMap<String, TaggedCaption>,
    references: BTreeMap<String, Vec<TaggedCaption>>,
}

impl TaggedCorpus {
    pub fn new(
        candidates: BTreeMap<String, TaggedCaption>,
        references: BTreeMap<String, Vec<TaggedCaption>>,
    ) -> Result<Self> {
        let missing: Vec<String> = candidates
            .keys()
            .filter(|id| references.get(*id).is_none_or(Vec::is_empty))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingReferences(missing));
        }
        let mut ids = candidates
            .values()
            .chain(references.values().flatten())
            .map(|t| t.model_id.as_str());
        if let Some(first) = ids.next() {
            if let Some(other) = ids.find(|id| *id != first) {
                return Err(Error::TaggerMismatch {
                    expected: first.to_owned(),
                    found: other.to_owned(),
                });
            }
        }
        Ok(TaggedCorpus {
            candidates,
            references,
        })
    }

    /// Tag every caption of `corpus` with `model`.
    pub fn tag(corpus: &Corpus, model: &TaggerModel) -> Self {
        let candidates = corpus
            .candidates()
            .par_iter()
            .map(|(id, c)| (id.clone(), model.tag(c)))
            .collect();
        let references = corpus
            .references()
            .par_iter()
            .filter(|(id, _)| corpus.candidates().contains_key(*id))
            .map(|(id, refs)| (id.clone(), refs.iter().map(|r| model.tag(r)).collect()))
            .collect();
        TaggedCorpus {
            candidates,
            references,
        }
    }

    pub fn candidates(&self) -> &BTreeMap<String, TaggedCaption> {
        &self.candidates
    }

    pub fn references(&self) -> &BTreeMap<String, Vec<TaggedCaption>> {
        &self.references
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Whether every candidate has exactly one reference.
    pub fn is_single_reference(&self) -> bool {
        self.candidates.keys().all(|id| self.references[id].len() == 1)
    }

    pub fn vocabulary(&self) -> HashSet<&Token> {
        self.candidates
            .values()
            .chain(self.references.values().flatten())
            .flat_map(|t| t.tokens())
            .collect()
    }

    fn check_mask(&self, mask: &Token) -> Result<()> {
        if self.vocabulary().contains(mask) {
            return Err(Error::MaskCollision(mask.to_string()));
        }
        Ok(())
    }

    fn scored<T: Scalar>(
        &self,
        mask: Option<(CoarseCategory, MaskScope, &Token)>,
        max_order: usize,
    ) -> Result<PrecisionReport<T>> {
        let apply = |t: &TaggedCaption, masked: bool| match mask {
            Some((cat, _, token)) if masked => mask_unchecked(t, cat, token),
            _ => t.caption.clone(),
        };
        let mask_refs = matches!(mask, Some((_, MaskScope::CandidateAndReferences, _)));
        let owned: Vec<(Caption, Vec<Caption>)> = self
            .candidates
            .iter()
            .map(|(id, cand)| {
                let refs = self.references[id].iter().map(|r| apply(r, mask_refs)).collect();
                (apply(cand, mask.is_some()), refs)
            })
            .collect();
        let pairs: Vec<(&Caption, &[Caption])> =
            owned.iter().map(|(c, r)| (c, r.as_slice())).collect();
        precision_of_pairs(&pairs, max_order)
    }

    /// Unmasked scores.
    pub fn system_scores<T: Scalar>(&self, max_order: usize) -> Result<PrecisionReport<T>> {
        self.scored(None, max_order)
    }
}

/// `(lower, upper)` reports for one category.
pub fn bound_scores<T: Scalar>(
    corpus: &TaggedCorpus,
    category: CoarseCategory,
    max_order: usize,
    mask: &Token,
) -> Result<(PrecisionReport<T>, PrecisionReport<T>)> {
    corpus.check_mask(mask)?;
    let lower = corpus.scored(Some((category, MaskScope::CandidateOnly, mask)), max_order)?;
    let upper = corpus.scored(
        Some((category, MaskScope::CandidateAndReferences, mask)),
        max_order,
    )?;
    Ok((lower, upper))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetricKind {
    /// Clipped precision P-n.
    Precision,
    /// Brevity-penalized geometric mean BLEU-n.
    Bleu,
}

impl MetricKind {
    pub fn prefix(self) -> &'static str {
        match self {
            MetricKind::Precision => "P",
            MetricKind::Bleu => "BLEU",
        }
    }

    fn value<T: Scalar>(self, report: &PrecisionReport<T>, n: usize) -> T {
        match self {
            MetricKind::Precision => report.precision(n),
            MetricKind::Bleu => report.bleu[n - 1],
        }
    }
}

/// Raw lower/system/upper reports for a set of categories.
#[derive(Clone, Debug)]
pub struct CategoryBounds<T> {
    pub max_order: usize,
    pub system: PrecisionReport<T>,
    pub per_category: BTreeMap<CoarseCategory, (PrecisionReport<T>, PrecisionReport<T>)>,
    pub single_reference: bool,
}

pub fn compute_bounds<T: Scalar>(
    corpus: &TaggedCorpus,
    categories: &BTreeSet<CoarseCategory>,
    max_order: usize,
    mask: &Token,
) -> Result<CategoryBounds<T>> {
    if categories.is_empty() {
        return Err(Error::InvalidArgument("no categories requested".into()));
    }
    corpus.check_mask(mask)?;
    let system = corpus.system_scores(max_order)?;
    let per_category = categories
        .par_iter()
        .map(|&cat| bound_scores(corpus, cat, max_order, mask).map(|b| (cat, b)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(CategoryBounds {
        max_order,
        system,
        per_category,
        single_reference: corpus.is_single_reference(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCell<T> {
    pub order: usize,
    pub lower: T,
    pub system: T,
    pub upper: T,
    pub warning: Option<String>,
}

impl<T: Scalar> BoundCell<T> {
    /// Headroom above the system score.
    pub fn improvement(&self) -> T {
        self.upper - self.system
    }

    /// Drop from the system score if the category were never right.
    pub fn loss(&self) -> T {
        self.system - self.lower
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CategoryBoundsReport<T> {
    pub metric_kind: MetricKind,
    pub max_order: usize,
    pub categories: BTreeMap<CoarseCategory, Vec<BoundCell<T>>>,
}

impl<T: Scalar> CategoryBounds<T> {
    pub fn report(&self, kind: MetricKind) -> CategoryBoundsReport<T> {
        let categories = self
            .per_category
            .iter()
            .map(|(&cat, (lower, upper))| {
                let cells = (1..=self.max_order)
                    .map(|n| {
                        let lower = kind.value(lower, n);
                        let system = kind.value(&self.system, n);
                        let upper = kind.value(upper, n);
                        let warning = if system > upper {
                            Some(format!(
                                "upper bound below system score ({} references per id)",
                                if self.single_reference { "single" } else { "multiple" }
                            ))
                        } else if lower > system {
                            Some("lower bound above system score".to_owned())
                        } else {
                            None
                        };
                        BoundCell {
                            order: n,
                            lower,
                            system,
                            upper,
                            warning,
                        }
                    })
                    .collect();
                (cat, cells)
            })
            .collect();
        CategoryBoundsReport {
            metric_kind: kind,
            max_order: self.max_order,
            categories,
        }
    }
}

pub fn bounds_report<T: Scalar>(
    corpus: &TaggedCorpus,
    categories: &BTreeSet<CoarseCategory>,
    max_order: usize,
    kind: MetricKind,
    mask: &Token,
) -> Result<CategoryBoundsReport<T>> {
    Ok(compute_bounds(corpus, categories, max_order, mask)?.report(kind))
}

impl<T: Scalar> CategoryBoundsReport<T> {
    pub fn cell(&self, category: CoarseCategory, order: usize) -> Option<&BoundCell<T>> {
        self.categories.get(&category)?.get(order.checked_sub(1)?)
    }

    pub fn warnings(&self) -> impl Iterator<Item = (CoarseCategory, &BoundCell<T>)> {
        self.categories
            .iter()
            .flat_map(|(c, cells)| cells.iter().map(move |cell| (*c, cell)))
            .filter(|(_, cell)| cell.warning.is_some())
    }

    /// Nested `category → order → {lower, system, upper, improvement, loss, warning?}`.
    pub fn to_json(&self) -> Value {
        let mut cats = Map::new();
        for (cat, cells) in &self.categories {
            let mut orders = Map::new();
            for cell in cells {
                let mut obj = json!({
                    "lower": sig6_json(cell.lower.to_f64_lossy()),
                    "system": sig6_json(cell.system.to_f64_lossy()),
                    "upper": sig6_json(cell.upper.to_f64_lossy()),
                    "improvement": sig6_json(cell.improvement().to_f64_lossy()),
                    "loss": sig6_json(cell.loss().to_f64_lossy()),
                });
                if let Some(w) = &cell.warning {
                    obj["warning"] = Value::String(w.clone());
                }
                orders.insert(cell.order.to_string(), obj);
            }
            cats.insert(cat.name().to_owned(), Value::Object(orders));
        }
        json!({
            "metric": format!("{}-n", self.metric_kind.prefix()),
            "max_order": self.max_order,
            "categories": cats,
        })
    }

    pub fn to_json_string(&self) -> String {
        to_sorted_json(&self.to_json())
    }

    pub fn csv_header() -> &'static str {
        "category,order,metric,lower,system,upper,improvement,loss,warning\n"
    }

    /// Rows only; pair with [`Self::csv_header`].
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for (cat, cells) in &self.categories {
            for cell in cells {
                let num = |v: T| sig6(v.to_f64_lossy()).to_string();
                out.push_str(&format!(
                    "{},{},{}-{},{},{},{},{},{},{}\n",
                    cat.name(),
                    cell.order,
                    self.metric_kind.prefix(),
                    cell.order,
                    num(cell.lower),
                    num(cell.system),
                    num(cell.upper),
                    num(cell.improvement()),
                    num(cell.loss()),
                    csv_field(cell.warning.as_deref().unwrap_or("")),
                ));
            }
        }
        out
    }
}
