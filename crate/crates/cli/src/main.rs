//! `capeval`: caption evaluation from the command line.
//!
//! Exit codes: 0 on success, 1 on runtime or data errors, 2 on usage errors.
//! Outputs are written atomically, so a failed run leaves no partial files.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use capeval::metrics::{reports_csv, PrecisionTable};
use capeval::nountrans::{write_pairs, DEFAULT_LM_ORDER};
use capeval::postag::{parse_conll, write_conll};
use capeval::report::{percent, to_sorted_json};
use capeval::text::{detokenize, load_annotations_json, load_results_json, load_tsv};
use capeval::{
    blind_pipeline, bounds_report, build_pairs, generate, report_table, train_lm, train_tagger,
    BeamGenerator, Caption, CategoryBoundsReport, CoarseCategory, Corpus, GenerationConfig,
    MetricKind, NgramLM, PrecisionReport, TaggedCorpus, TaggerModel, Token, TokenizeConfig,
    DEFAULT_MASK,
};
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "capeval", version, about = "Caption evaluation: n-gram precision, category bounds, blind noun translation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a POS tagger from a word<TAB>tag file (blank line between sentences).
    TagTrain(TagTrainArgs),
    /// Tag captions, one per line, writing word<TAB>tag output.
    Tag(TagArgs),
    /// Corpus-level P-n and BLEU-n of candidates against references.
    Bleu(BleuArgs),
    /// Per-category lower/upper bounds by masking.
    Bounds(BoundsArgs),
    /// Build shuffled-noun/caption training pairs.
    NtPairs(NtPairsArgs),
    /// Train the n-gram language model used for generation.
    NtTrain(NtTrainArgs),
    /// Generate captions from noun sets.
    NtGenerate(NtGenerateArgs),
    /// Compare system captions with captions generated from their nouns alone.
    Blind(BlindArgs),
}

#[derive(Args, Serialize, Clone, Copy)]
struct TokenArgs {
    /// Lowercase captions before scoring.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    lowercase: bool,
    /// Split punctuation into separate tokens.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    split_punct: bool,
}

impl TokenArgs {
    fn config(self) -> TokenizeConfig {
        TokenizeConfig {
            lowercase: self.lowercase,
            split_punct: self.split_punct,
        }
    }
}

#[derive(ValueEnum, Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Serialize)]
struct TagTrainArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Serialize)]
struct TagArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    tokens: TokenArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BleuArgs {
    /// Results JSON (`[{image_id, caption}]`) or id<TAB>caption TSV.
    #[arg(long)]
    candidates: PathBuf,
    /// Annotations JSON (`{"annotations": [...]}`) or id<TAB>caption TSV.
    #[arg(long)]
    references: PathBuf,
    #[command(flatten)]
    tokens: TokenArgs,
    #[arg(long, default_value_t = 4)]
    max_order: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BoundsArgs {
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long)]
    references: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Category to ablate (repeatable); all ten when omitted.
    #[arg(long = "category")]
    categories: Vec<String>,
    #[command(flatten)]
    tokens: TokenArgs,
    #[arg(long, default_value_t = 4)]
    max_order: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct NtPairsArgs {
    #[arg(long)]
    model: PathBuf,
    /// Captions as annotations JSON or id<TAB>caption TSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pairs_per_caption: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    tokens: TokenArgs,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Serialize)]
struct NtTrainArgs {
    /// Captions as annotations JSON or TSV; a pair file also works, since
    /// its second column is the caption.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_LM_ORDER)]
    lm_order: usize,
    #[command(flatten)]
    tokens: TokenArgs,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Serialize, Clone, Copy)]
struct GeneratorArgs {
    #[arg(long, default_value_t = GenerationConfig::default().beam_width)]
    beam: usize,
    #[arg(long, default_value_t = GenerationConfig::default().max_length)]
    max_length: usize,
    #[arg(long, default_value_t = GenerationConfig::default().coverage_bonus)]
    coverage_bonus: f64,
}

impl GeneratorArgs {
    fn config(self, seed: u64) -> GenerationConfig {
        GenerationConfig {
            beam_width: self.beam,
            max_length: self.max_length,
            coverage_bonus: self.coverage_bonus,
            seed,
        }
    }
}

#[derive(Args, Serialize)]
struct NtGenerateArgs {
    #[arg(long)]
    lm: PathBuf,
    /// One noun set per line, either `nouns` or `id<TAB>nouns`.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
#[command(group = clap::ArgGroup::new("lm_source").required(true).args(["lm", "train_captions"]))]
struct BlindArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    references: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Trained language model (from `nt-train`).
    #[arg(long)]
    lm: Option<PathBuf>,
    /// Captions to train a language model from on the fly.
    #[arg(long)]
    train_captions: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_LM_ORDER)]
    lm_order: usize,
    #[command(flatten)]
    generator: GeneratorArgs,
    #[command(flatten)]
    tokens: TokenArgs,
    #[arg(long, default_value_t = 4)]
    max_order: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Per-id generated captions; defaults to `<output>.generated.tsv`.
    #[arg(long)]
    generated: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::TagTrain(a) => cmd_tag_train(a),
        Command::Tag(a) => cmd_tag(a),
        Command::Bleu(a) => cmd_bleu(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::NtPairs(a) => cmd_nt_pairs(a),
        Command::NtTrain(a) => cmd_nt_train(a),
        Command::NtGenerate(a) => cmd_nt_generate(a),
        Command::Blind(a) => cmd_blind(a),
    }
}

// --- I/O helpers ----------------------------------------------------------

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("failed to read {}", path.display()))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// One caption per id, from results JSON or TSV.
fn load_candidates(path: &Path, cfg: TokenizeConfig) -> Result<BTreeMap<String, Caption>> {
    if is_json(path) {
        return Ok(load_results_json(path, cfg)?);
    }
    load_tsv(path, cfg)?
        .into_iter()
        .map(|(id, mut caps)| {
            if caps.len() != 1 {
                bail!("{}: id {id:?} has {} candidate captions, expected 1", path.display(), caps.len());
            }
            Ok((id, caps.pop().unwrap()))
        })
        .collect()
}

fn load_captions(path: &Path, cfg: TokenizeConfig) -> Result<BTreeMap<String, Vec<Caption>>> {
    Ok(if is_json(path) {
        load_annotations_json(path, cfg)?
    } else {
        load_tsv(path, cfg)?
    })
}

fn load_tagger(path: &Path) -> Result<TaggerModel> {
    TaggerModel::from_json(&read(path)?)
        .with_context(|| format!("failed to load tagger model {}", path.display()))
}

/// Writes go to a sibling temp file first; nothing is persisted until every
/// output of the run is ready.
struct Outputs {
    staged: Vec<(tempfile::NamedTempFile, PathBuf)>,
    stdout: Vec<String>,
}

impl Outputs {
    fn new() -> Self {
        Outputs { staged: Vec::new(), stdout: Vec::new() }
    }

    fn add(&mut self, path: Option<&Path>, contents: &str) -> Result<()> {
        let Some(path) = path else {
            self.stdout.push(contents.to_owned());
            return Ok(());
        };
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)
            .with_context(|| format!("cannot create output in {}", dir.display()))?;
        tmp.write_all(contents.as_bytes())?;
        tmp.flush()?;
        self.staged.push((tmp, path.to_owned()));
        Ok(())
    }

    fn commit(self) -> Result<()> {
        for (tmp, path) in self.staged {
            tmp.persist(&path)
                .with_context(|| format!("failed to write {}", path.display()))?;
        }
        let mut out = std::io::stdout().lock();
        for s in self.stdout {
            out.write_all(s.as_bytes())?;
        }
        Ok(())
    }
}

fn write_one(path: Option<&Path>, contents: &str) -> Result<()> {
    let mut outputs = Outputs::new();
    outputs.add(path, contents)?;
    outputs.commit()
}

fn run_config<A: Serialize>(subcommand: &str, args: &A) -> Value {
    let mut value = serde_json::to_value(args).expect("argument structs serialize");
    value["subcommand"] = json!(subcommand);
    value
}

/// CSV outputs carry the config as a leading comment line.
fn csv_with_config(config: &Value, body: &str) -> String {
    format!("# config: {config}\n{body}")
}

fn table_json(table: &PrecisionTable) -> Value {
    json!({
        "header": (1..=table.max_order).map(|n| format!("P-{n}")).collect::<Vec<_>>(),
        "rows": table.rows.iter().map(|r| json!({"label": r.label, "cells": r.cells})).collect::<Vec<_>>(),
    })
}

fn precision_document(config: Value, reports: &[(&str, &PrecisionReport<f64>)], format: Format) -> Result<String> {
    let table = report_table(reports)?;
    Ok(match format {
        Format::Json => {
            let rows: Vec<Value> = reports.iter().map(|(l, r)| r.to_json(l)).collect();
            to_sorted_json(&json!({"config": config, "reports": rows, "table": table_json(&table)}))
        }
        Format::Csv => csv_with_config(&config, &reports_csv(reports)),
    })
}

// --- subcommands ----------------------------------------------------------

fn cmd_tag_train(a: TagTrainArgs) -> Result<()> {
    let sentences = parse_conll(&read(&a.input)?)
        .with_context(|| format!("failed to parse {}", a.input.display()))?;
    let model = train_tagger(&sentences, a.epochs, a.seed)?;
    eprintln!("trained tagger {} on {} sentences", model.id(), sentences.len());
    write_one(Some(&a.output), &model.to_json())
}

fn cmd_tag(a: TagArgs) -> Result<()> {
    let model = load_tagger(&a.model)?;
    let cfg = a.tokens.config();
    let text = read(&a.input)?;
    let tagged: Vec<_> = text
        .lines()
        .enumerate()
        .map(|(i, line)| Caption::from_text((i + 1).to_string(), line, cfg))
        .filter(|c| !c.is_empty())
        .map(|c| model.tag(&c))
        .collect();
    write_one(a.output.as_deref(), &write_conll(&tagged))
}

fn cmd_bleu(a: BleuArgs) -> Result<()> {
    let cfg = a.tokens.config();
    let corpus = Corpus::new(load_candidates(&a.candidates, cfg)?, load_captions(&a.references, cfg)?)?;
    let report: PrecisionReport<f64> = capeval::corpus_precision(&corpus, a.max_order)?;
    let doc = precision_document(run_config("bleu", &a), &[("candidates", &report)], a.format)?;
    write_one(a.output.as_deref(), &doc)
}

fn parse_categories(names: &[String]) -> Result<BTreeSet<CoarseCategory>> {
    if names.is_empty() {
        return Ok(CoarseCategory::ALL.into_iter().collect());
    }
    Ok(names.iter().map(|n| n.parse()).collect::<capeval::Result<_>>()?)
}

fn percent_cells(report: &CategoryBoundsReport<f64>) -> Value {
    let mut out = serde_json::Map::new();
    for (cat, cells) in &report.categories {
        let orders: serde_json::Map<String, Value> = cells
            .iter()
            .map(|c| {
                let v = json!({
                    "lower": percent(c.lower),
                    "system": percent(c.system),
                    "upper": percent(c.upper),
                });
                (c.order.to_string(), v)
            })
            .collect();
        out.insert(cat.name().to_owned(), Value::Object(orders));
    }
    Value::Object(out)
}

fn cmd_bounds(a: BoundsArgs) -> Result<()> {
    let categories = parse_categories(&a.categories)?;
    let cfg = a.tokens.config();
    let model = load_tagger(&a.model)?;
    let corpus = Corpus::new(load_candidates(&a.candidates, cfg)?, load_captions(&a.references, cfg)?)?;
    let tagged = TaggedCorpus::tag(&corpus, &model);
    let mask = Token::new(DEFAULT_MASK)?;
    let reports = [MetricKind::Precision, MetricKind::Bleu]
        .map(|kind| bounds_report::<f64>(&tagged, &categories, a.max_order, kind, &mask));
    let [precision, bleu] = reports;
    let (precision, bleu) = (precision?, bleu?);
    for (cat, cell) in precision.warnings().chain(bleu.warnings()) {
        eprintln!("warning: {} order {}: {}", cat.name(), cell.order, cell.warning.as_deref().unwrap_or(""));
    }
    let config = run_config("bounds", &a);
    let doc = match a.format {
        Format::Json => to_sorted_json(&json!({
            "config": config,
            "tagger": model.id(),
            "precision": precision.to_json(),
            "bleu": bleu.to_json(),
            "percent": percent_cells(&precision),
        })),
        Format::Csv => csv_with_config(
            &config,
            &format!("{}{}{}", CategoryBoundsReport::<f64>::csv_header(), precision.csv_rows(), bleu.csv_rows()),
        ),
    };
    write_one(a.output.as_deref(), &doc)
}

fn cmd_nt_pairs(a: NtPairsArgs) -> Result<()> {
    let model = load_tagger(&a.model)?;
    let captions = load_captions(&a.input, a.tokens.config())?;
    let tagged: Vec<_> = captions.values().flatten().map(|c| model.tag(c)).collect();
    let pairs = build_pairs(&tagged, a.pairs_per_caption, a.seed)?;
    write_one(Some(&a.output), &write_pairs(&pairs))
}

fn training_captions(path: &Path, cfg: TokenizeConfig) -> Result<Vec<Caption>> {
    Ok(load_captions(path, cfg)?.into_values().flatten().collect())
}

fn cmd_nt_train(a: NtTrainArgs) -> Result<()> {
    let lm = train_lm(&training_captions(&a.input, a.tokens.config())?, a.lm_order)?;
    write_one(Some(&a.output), &lm.to_json())
}

fn load_lm(path: &Path) -> Result<NgramLM> {
    NgramLM::from_json(&read(path)?).with_context(|| format!("failed to load language model {}", path.display()))
}

fn cmd_nt_generate(a: NtGenerateArgs) -> Result<()> {
    let lm = load_lm(&a.lm)?;
    let config = a.generator.config(a.seed);
    let raw = TokenizeConfig { lowercase: false, split_punct: false };
    let mut out = String::new();
    for (i, line) in read(&a.input)?.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let (id, nouns) = match line.split_once('\t') {
            Some((id, nouns)) => (id.to_owned(), nouns),
            None => ((i + 1).to_string(), line),
        };
        let source = capeval::tokenize(nouns, raw);
        let generation = generate(&lm, &source, &config)?;
        if generation.degraded() {
            eprintln!("warning: {id}: generated caption does not cover every source noun");
        }
        out.push_str(&format!("{id}\t{}\t{}\n", detokenize(&source), detokenize(&generation.tokens)));
    }
    write_one(a.output.as_deref(), &out)
}

fn cmd_blind(a: BlindArgs) -> Result<()> {
    let cfg = a.tokens.config();
    let tagger = load_tagger(&a.model)?;
    let system = load_candidates(&a.system, cfg)?;
    let references = load_captions(&a.references, cfg)?;
    let lm = match (&a.lm, &a.train_captions) {
        (Some(path), _) => load_lm(path)?,
        (None, Some(path)) => train_lm(&training_captions(path, cfg)?, a.lm_order)?,
        (None, None) => unreachable!("clap requires one LM source"),
    };
    let generator = BeamGenerator::new(&lm, a.generator.config(a.seed))?;
    let outcome = blind_pipeline::<f64, _>(&system, &references, &tagger, &generator, a.seed, a.max_order)?;
    let degraded = outcome.generated.values().filter(|g| g.generation.degraded()).count();
    if degraded > 0 {
        eprintln!("warning: {degraded} generated captions miss some source nouns");
    }

    let config = run_config("blind", &a);
    let reports = [("system", &outcome.system), ("blind", &outcome.blind)];
    let doc = match a.format {
        Format::Json => {
            let rows: Vec<Value> = reports.iter().map(|(l, r)| r.to_json(l)).collect();
            let gap: Vec<String> = outcome
                .system
                .precisions()
                .iter()
                .zip(outcome.blind.precisions())
                .map(|(s, b)| percent(s - b))
                .collect();
            to_sorted_json(&json!({
                "config": config,
                "tagger": tagger.id(),
                "reports": rows,
                "table": table_json(&outcome.table()),
                "gap": gap,
            }))
        }
        Format::Csv => precision_document(config, &reports, Format::Csv)?,
    };

    let generated_path = a.generated.clone().or_else(|| {
        a.output.as_ref().map(|o| {
            let mut name = o.as_os_str().to_owned();
            name.push(".generated.tsv");
            PathBuf::from(name)
        })
    });
    let mut outputs = Outputs::new();
    outputs.add(a.output.as_deref(), &doc)?;
    if a.output.is_none() {
        eprint!("{}", outcome.table());
    }
    if let Some(path) = &generated_path {
        outputs.add(Some(path), &outcome.generated_tsv())?;
    }
    outputs.commit()
}

