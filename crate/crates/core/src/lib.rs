//! Caption evaluation toolkit.
//!
//! * [`text`]: tokenization and the caption file formats.
//! * [`metrics`]: corpus-level clipped n-gram precision and BLEU.
//! * [`postag`]: an averaged-perceptron POS tagger and coarse word categories.
//! * [`ablation`]: per-category lower/upper bounds by token masking.
//! * [`nountrans`]: caption generation from bags of nouns and the
//!   system-versus-blind comparison.
//!
//! Scores are generic over the floating-point type; the aliases below fix
//! the common choices.

pub mod ablation;
pub mod desk;
pub mod error;
pub mod metrics;
pub mod nountrans;
pub mod postag;
pub mod report;
pub mod scalar;
pub mod text;

pub use ablation::{
    bound_scores, bounds_report, compute_bounds, mask_category, BoundCell, CategoryBounds,
    CategoryBoundsReport, MaskScope, MetricKind, TaggedCorpus, DEFAULT_MASK,
};
pub use error::{Error, Result};
pub use metrics::{
    clipped_matches, corpus_precision, extract_ngrams, report_table, NgramCounts,
    PrecisionReport, PrecisionTable, DEFAULT_MAX_ORDER,
};
pub use nountrans::{
    blind_pipeline, build_pairs, generate, train_lm, BeamGenerator, BlindOutcome,
    CaptionGenerator, Generation, GenerationConfig, NgramLM, NounPair,
};
pub use postag::{
    extract_category, train_tagger, CoarseCategory, FineTag, TaggedCaption, TaggedSentence,
    TaggerModel,
};
pub use scalar::Scalar;
pub use text::{tokenize, Caption, Corpus, Token, TokenizeConfig};

pub type PrecisionReportF64 = PrecisionReport<f64>;
pub type PrecisionReportF32 = PrecisionReport<f32>;
pub type CategoryBoundsReportF64 = CategoryBoundsReport<f64>;
pub type CategoryBoundsReportF32 = CategoryBoundsReport<f32>;
pub type BlindOutcomeF64 = BlindOutcome<f64>;
