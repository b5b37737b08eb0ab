//! Corpus-level clipped n-gram precision and BLEU.
//!
//! Match and candidate counts are pooled over the whole corpus before any
//! division, and each candidate n-gram type is clipped at its largest count
//! in any single reference. Counts stay integral; the scalar type `T` is
//! only used for the brevity penalty and the geometric-mean composition.

use std::collections::HashMap;
use std::ops::Add;

use num_rational::Ratio;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::report::{csv_field, percent_ratio, sig6_json, to_sorted_json};
use crate::scalar::Scalar;
use crate::text::{Caption, Corpus, Token};

pub const DEFAULT_MAX_ORDER: usize = 4;

/// Multiset of the contiguous n-grams of one order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NgramCounts {
    order: usize,
    counts: HashMap<Vec<Token>, usize>,
}

impl NgramCounts {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, ngram: &[Token]) -> usize {
        self.counts.get(ngram).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[Token], usize)> {
        self.counts.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    /// Number of distinct n-gram types.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total n-gram occurrences.
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

pub fn extract_ngrams(caption: &Caption, n: usize) -> Result<NgramCounts> {
    ngrams_of(&caption.tokens, n)
}

pub fn ngrams_of(tokens: &[Token], n: usize) -> Result<NgramCounts> {
    if n == 0 {
        return Err(Error::InvalidArgument("n-gram order must be at least 1".into()));
    }
    let mut counts = HashMap::new();
    for window in tokens.windows(n) {
        *counts.entry(window.to_vec()).or_insert(0) += 1;
    }
    Ok(NgramCounts { order: n, counts })
}

/// Σ over candidate types g of min(count(g), max over references of count(g)).
pub fn clipped_matches(candidate: &NgramCounts, references: &[NgramCounts]) -> Result<usize> {
    if references.is_empty() {
        return Err(Error::InvalidArgument("at least one reference is required".into()));
    }
    if let Some(bad) = references.iter().find(|r| r.order != candidate.order) {
        return Err(Error::InvalidArgument(format!(
            "order mismatch: candidate has order {}, reference has order {}",
            candidate.order, bad.order
        )));
    }
    Ok(candidate
        .iter()
        .map(|(gram, count)| {
            let ceiling = references.iter().map(|r| r.get(gram)).max().unwrap_or(0);
            count.min(ceiling)
        })
        .sum())
}

/// Sufficient statistics of one sentence (or a pooled set of sentences).
/// Pooling is plain integer addition, so any partition and order of
/// combination gives the same corpus totals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SentenceStats {
    pub matched: Vec<u64>,
    pub total: Vec<u64>,
    pub candidate_length: u64,
    pub reference_length: u64,
}

impl SentenceStats {
    pub fn zero(max_order: usize) -> Self {
        SentenceStats {
            matched: vec![0; max_order],
            total: vec![0; max_order],
            candidate_length: 0,
            reference_length: 0,
        }
    }

    pub fn max_order(&self) -> usize {
        self.matched.len()
    }
}

impl Add for SentenceStats {
    type Output = SentenceStats;

    fn add(mut self, other: SentenceStats) -> SentenceStats {
        debug_assert_eq!(self.max_order(), other.max_order());
        for (a, b) in self.matched.iter_mut().zip(&other.matched) {
            *a += b;
        }
        for (a, b) in self.total.iter_mut().zip(&other.total) {
            *a += b;
        }
        self.candidate_length += other.candidate_length;
        self.reference_length += other.reference_length;
        self
    }
}

fn count_windows(tokens: &[Token], n: usize) -> HashMap<&[Token], u64> {
    let mut counts = HashMap::with_capacity(tokens.len());
    for window in tokens.windows(n) {
        *counts.entry(window).or_insert(0) += 1;
    }
    counts
}

/// Reference length closest to `candidate_len`, ties going to the shorter one.
pub fn closest_reference_length<'a, I>(candidate_len: usize, reference_lens: I) -> Option<usize>
where
    I: IntoIterator<Item = usize> + 'a,
{
    reference_lens
        .into_iter()
        .min_by_key(|&len| (len.abs_diff(candidate_len), len))
}

/// Clipped counts for one candidate against its references.
pub fn sentence_stats(
    candidate: &[Token],
    references: &[Caption],
    max_order: usize,
) -> Result<SentenceStats> {
    if max_order == 0 {
        return Err(Error::InvalidArgument("max_order must be at least 1".into()));
    }
    if references.is_empty() {
        return Err(Error::InvalidArgument("at least one reference is required".into()));
    }
    let mut stats = SentenceStats::zero(max_order);
    for n in 1..=max_order {
        let cand = count_windows(candidate, n);
        if cand.is_empty() {
            continue;
        }
        let mut ceiling: HashMap<&[Token], u64> = HashMap::with_capacity(cand.len());
        for reference in references {
            for (gram, count) in count_windows(&reference.tokens, n) {
                if cand.contains_key(gram) {
                    let slot = ceiling.entry(gram).or_insert(0);
                    *slot = (*slot).max(count);
                }
            }
        }
        let mut matched = 0;
        let mut total = 0;
        for (gram, count) in &cand {
            total += count;
            matched += (*count).min(ceiling.get(gram).copied().unwrap_or(0));
        }
        stats.matched[n - 1] = matched;
        stats.total[n - 1] = total;
    }
    stats.candidate_length = candidate.len() as u64;
    stats.reference_length =
        closest_reference_length(candidate.len(), references.iter().map(Caption::len))
            .expect("references are non-empty") as u64;
    Ok(stats)
}

/// Corpus-level precisions, brevity penalty, and BLEU-1..N.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionReport<T> {
    pub matched: Vec<u64>,
    pub total: Vec<u64>,
    pub candidate_length: u64,
    pub effective_reference_length: u64,
    pub brevity_penalty: T,
    pub bleu: Vec<T>,
}

impl<T: Scalar> PrecisionReport<T> {
    pub fn from_stats(stats: SentenceStats) -> Self {
        let SentenceStats {
            matched,
            total,
            candidate_length: c,
            reference_length: r,
        } = stats;
        let brevity_penalty = brevity_penalty::<T>(c, r);
        let mut bleu = Vec::with_capacity(matched.len());
        let mut log_sum = T::zero();
        let mut all_positive = true;
        for (k, (&m, &t)) in matched.iter().zip(&total).enumerate() {
            if m == 0 || t == 0 {
                all_positive = false;
            }
            if all_positive {
                log_sum = log_sum + T::from_ratio(m, t).ln();
                let n = T::from_usize(k + 1).unwrap();
                bleu.push(brevity_penalty * (log_sum / n).exp());
            } else {
                bleu.push(T::zero());
            }
        }
        PrecisionReport {
            matched,
            total,
            candidate_length: c,
            effective_reference_length: r,
            brevity_penalty,
            bleu,
        }
    }

    /// Build a report directly from pooled counts.
    pub fn from_counts(matched: Vec<u64>, total: Vec<u64>, c: u64, r: u64) -> Result<Self> {
        if matched.len() != total.len() || matched.is_empty() {
            return Err(Error::InvalidArgument(
                "matched and total must be non-empty and of equal length".into(),
            ));
        }
        if matched.iter().zip(&total).any(|(m, t)| m > t) {
            return Err(Error::InvalidArgument("matched count exceeds total".into()));
        }
        if c == 0 {
            return Err(Error::InvalidArgument("candidate length must be positive".into()));
        }
        Ok(Self::from_stats(SentenceStats {
            matched,
            total,
            candidate_length: c,
            reference_length: r,
        }))
    }

    pub fn max_order(&self) -> usize {
        self.matched.len()
    }

    /// Exact P-n for 1-based `n`; `None` when the corpus has no n-grams of
    /// that order.
    pub fn precision_ratio(&self, n: usize) -> Option<Ratio<u64>> {
        let t = *self.total.get(n.checked_sub(1)?)?;
        (t > 0).then(|| Ratio::new(self.matched[n - 1], t))
    }

    /// P-n as a scalar, 0 when undefined.
    pub fn precision(&self, n: usize) -> T {
        match (self.matched.get(n.wrapping_sub(1)), self.total.get(n.wrapping_sub(1))) {
            (Some(&m), Some(&t)) if t > 0 => T::from_ratio(m, t),
            _ => T::zero(),
        }
    }

    pub fn precisions(&self) -> Vec<T> {
        (1..=self.max_order()).map(|n| self.precision(n)).collect()
    }

    pub fn to_json(&self, label: &str) -> Value {
        json!({
            "label": label,
            "p": self.precisions().into_iter().map(|p| sig6_json(p.to_f64_lossy())).collect::<Vec<_>>(),
            "bleu": self.bleu.iter().map(|b| sig6_json(b.to_f64_lossy())).collect::<Vec<_>>(),
            "bp": sig6_json(self.brevity_penalty.to_f64_lossy()),
            "c": self.candidate_length,
            "r": self.effective_reference_length,
            "matched": self.matched,
            "total": self.total,
        })
    }
}

pub fn brevity_penalty<T: Scalar>(candidate_length: u64, reference_length: u64) -> T {
    if candidate_length > reference_length {
        T::one()
    } else {
        (T::one() - T::from_ratio(reference_length, candidate_length)).exp()
    }
}

/// Score every candidate in `corpus` against its references.
pub fn corpus_precision<T: Scalar>(corpus: &Corpus, max_order: usize) -> Result<PrecisionReport<T>> {
    if corpus.is_empty() {
        return Err(Error::InvalidArgument("corpus is empty".into()));
    }
    let pairs: Vec<(&Caption, &[Caption])> = corpus.pairs().collect();
    precision_of_pairs(&pairs, max_order)
}

/// Same as [`corpus_precision`] over an explicit list of pairs.
pub fn precision_of_pairs<T: Scalar>(
    pairs: &[(&Caption, &[Caption])],
    max_order: usize,
) -> Result<PrecisionReport<T>> {
    if max_order == 0 {
        return Err(Error::InvalidArgument("max_order must be at least 1".into()));
    }
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("corpus is empty".into()));
    }
    if let Some((empty, _)) = pairs.iter().find(|(c, _)| c.is_empty()) {
        return Err(Error::EmptyCaption(empty.example_id.clone()));
    }
    let stats = pairs
        .par_iter()
        .map(|(cand, refs)| sentence_stats(&cand.tokens, refs, max_order))
        .try_reduce(|| SentenceStats::zero(max_order), |a, b| Ok(a + b))?;
    Ok(PrecisionReport::from_stats(stats))
}

/// Labeled rows of P-n percentages with one decimal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecisionTable {
    pub max_order: usize,
    pub rows: Vec<TableRow>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub label: String,
    pub cells: Vec<String>,
}

impl TableRow {
    pub fn cells_joined(&self) -> String {
        self.cells.join(" ")
    }
}

pub fn report_table<T: Scalar>(reports: &[(&str, &PrecisionReport<T>)]) -> Result<PrecisionTable> {
    if reports.is_empty() {
        return Err(Error::InvalidArgument("no reports to tabulate".into()));
    }
    let max_order = reports.iter().map(|(_, r)| r.max_order()).max().unwrap_or(0);
    let rows = reports
        .iter()
        .map(|(label, report)| TableRow {
            label: (*label).to_owned(),
            cells: (0..max_order)
                .map(|k| match (report.matched.get(k), report.total.get(k)) {
                    (Some(&m), Some(&t)) => percent_ratio(m, t),
                    _ => "-".to_owned(),
                })
                .collect(),
        })
        .collect();
    Ok(PrecisionTable { max_order, rows })
}

impl PrecisionTable {
    fn header(&self) -> Vec<String> {
        (1..=self.max_order).map(|n| format!("P-{n}")).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for h in self.header() {
            out.push(',');
            out.push_str(&h);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&csv_field(&row.label));
            for cell in &row.cells {
                out.push(',');
                out.push_str(cell);
            }
            out.push('\n');
        }
        out
    }
}

impl std::fmt::Display for PrecisionTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let label_width = self
            .rows
            .iter()
            .map(|r| r.label.chars().count())
            .max()
            .unwrap_or(0)
            .max("Model".len());
        write!(f, "{:<label_width$}", "Model")?;
        for h in self.header() {
            write!(f, " {h:>6}")?;
        }
        writeln!(f)?;
        for row in &self.rows {
            write!(f, "{:<label_width$}", row.label)?;
            for cell in &row.cells {
                write!(f, " {cell:>6}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// JSON document for a list of labeled reports.
pub fn reports_json<T: Scalar>(reports: &[(&str, &PrecisionReport<T>)]) -> String {
    let rows: Vec<Value> = reports.iter().map(|(l, r)| r.to_json(l)).collect();
    to_sorted_json(&Value::Array(rows))
}

/// One CSV row per label with precisions, BLEU, BP, and raw counts.
pub fn reports_csv<T: Scalar>(reports: &[(&str, &PrecisionReport<T>)]) -> String {
    let max_order = reports.iter().map(|(_, r)| r.max_order()).max().unwrap_or(0);
    let mut header = vec!["label".to_owned()];
    for prefix in ["p", "bleu", "matched", "total"] {
        header.extend((1..=max_order).map(|n| format!("{prefix}{n}")));
    }
    header.extend(["bp", "c", "r"].map(String::from));
    let mut out = header.join(",");
    out.push('\n');
    for (label, report) in reports {
        let mut fields = vec![csv_field(label)];
        let num = |v: f64| crate::report::sig6(v).to_string();
        fields.extend(report.precisions().iter().map(|p| num(p.to_f64_lossy())));
        fields.extend(report.bleu.iter().map(|b| num(b.to_f64_lossy())));
        fields.extend(report.matched.iter().map(u64::to_string));
        fields.extend(report.total.iter().map(u64::to_string));
        fields.push(num(report.brevity_penalty.to_f64_lossy()));
        fields.push(report.candidate_length.to_string());
        fields.push(report.effective_reference_length.to_string());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{tokenize, TokenizeConfig};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cap(id: &str, text: &str) -> Caption {
        Caption::from_text(id, text, TokenizeConfig::default())
    }

    fn toks(text: &str) -> Vec<Token> {
        tokenize(text, TokenizeConfig::default())
    }

    #[test]
    fn extract_examples() {
        let c = cap("1", "a dog runs");
        let uni = extract_ngrams(&c, 1).unwrap();
        assert_eq!(uni.len(), 3);
        assert_eq!(uni.get(&toks("dog")), 1);
        let bi = extract_ngrams(&c, 2).unwrap();
        assert_eq!(bi.len(), 2);
        assert_eq!(bi.get(&toks("a dog")), 1);
        assert_eq!(bi.get(&toks("dog runs")), 1);
        assert!(extract_ngrams(&cap("1", "a dog"), 3).unwrap().is_empty());
        assert!(extract_ngrams(&c, 0).is_err());
    }

    #[test]
    fn clipped_examples() {
        let cand = cap("1", "the cat the cat on the mat");
        let reference = cap("1", "the cat is on the mat");
        let m1 = clipped_matches(
            &extract_ngrams(&cand, 1).unwrap(),
            &[extract_ngrams(&reference, 1).unwrap()],
        )
        .unwrap();
        assert_eq!(m1, 5);
        let c2 = extract_ngrams(&cand, 2).unwrap();
        assert_eq!(c2.total(), 6);
        let m2 = clipped_matches(&c2, &[extract_ngrams(&reference, 2).unwrap()]).unwrap();
        assert_eq!(m2, 3);

        for n in 1..=4 {
            let g = extract_ngrams(&reference, n).unwrap();
            assert_eq!(clipped_matches(&g, std::slice::from_ref(&g)).unwrap(), g.total());
        }

        let err = clipped_matches(&c2, &[extract_ngrams(&reference, 1).unwrap()]);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
        assert!(clipped_matches(&c2, &[]).is_err());
    }

    #[test]
    fn identity_corpus_is_perfect() {
        let corpus = Corpus::from_pairs([(cap("1", "a b c d e"), vec![cap("1", "a b c d e")])]).unwrap();
        let report: PrecisionReport<f64> = corpus_precision(&corpus, 4).unwrap();
        for n in 1..=4 {
            assert_eq!(report.precision_ratio(n), Some(Ratio::from_integer(1)));
            assert_eq!(report.bleu[n - 1], 1.0);
        }
        assert_eq!(report.brevity_penalty, 1.0);
    }

    #[test]
    fn disjoint_corpus_scores_zero() {
        let corpus = Corpus::from_pairs([(cap("1", "a b c"), vec![cap("1", "x y z")])]).unwrap();
        let report: PrecisionReport<f64> = corpus_precision(&corpus, 4).unwrap();
        assert_eq!(report.precision_ratio(1), Some(Ratio::from_integer(0)));
        assert!(report.bleu.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn brevity_penalty_closed_form() {
        let corpus =
            Corpus::from_pairs([(cap("1", "a b c"), vec![cap("1", "a b c d e f")])]).unwrap();
        let report: PrecisionReport<f64> = corpus_precision(&corpus, 1).unwrap();
        assert_eq!(report.matched[0], 3);
        assert_eq!(report.effective_reference_length, 6);
        assert_relative_eq!(report.brevity_penalty, (-1.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(report.brevity_penalty, 0.367879, epsilon = 1e-6);
    }

    #[test]
    fn closest_length_ties_to_shorter() {
        assert_eq!(closest_reference_length(5, [3, 7]), Some(3));
        assert_eq!(closest_reference_length(5, [7, 3]), Some(3));
        assert_eq!(closest_reference_length(5, [6, 9, 5]), Some(5));
        assert_eq!(closest_reference_length(5, Vec::<usize>::new()), None);
    }

    #[test]
    fn empty_candidate_is_rejected() {
        let corpus = Corpus::from_pairs([(Caption::new("1", vec![]), vec![cap("1", "a")])]).unwrap();
        assert!(matches!(
            corpus_precision::<f64>(&corpus, 4),
            Err(Error::EmptyCaption(id)) if id == "1"
        ));
    }

    #[test]
    fn f32_and_f64_agree() {
        let corpus = Corpus::from_pairs([
            (cap("1", "the cat the cat on the mat"), vec![cap("1", "the cat is on the mat")]),
            (cap("2", "a dog runs fast"), vec![cap("2", "a dog runs"), cap("2", "the dog runs fast")]),
        ])
        .unwrap();
        let a: PrecisionReport<f64> = corpus_precision(&corpus, 4).unwrap();
        let b: PrecisionReport<f32> = corpus_precision(&corpus, 4).unwrap();
        assert_eq!(a.matched, b.matched);
        assert_eq!(a.total, b.total);
        for (x, y) in a.bleu.iter().zip(&b.bleu) {
            assert_relative_eq!(*x, f64::from(*y), epsilon = 1e-6);
        }
    }

    #[test]
    fn table_rendering() {
        let ones: PrecisionReport<f64> =
            PrecisionReport::from_counts(vec![4, 3, 2, 1], vec![4, 3, 2, 1], 4, 4).unwrap();
        let system: PrecisionReport<f64> = PrecisionReport::from_counts(
            vec![631, 352, 177, 93],
            vec![1000, 1000, 1000, 1000],
            1000,
            1000,
        )
        .unwrap();
        let blind: PrecisionReport<f64> = PrecisionReport::from_counts(
            vec![619, 320, 157, 82],
            vec![1000, 1000, 1000, 1000],
            1000,
            1000,
        )
        .unwrap();
        let table =
            report_table(&[("ones", &ones), ("system", &system), ("blind", &blind)]).unwrap();
        assert_eq!(table.rows[0].cells_joined(), "100.0 100.0 100.0 100.0");
        assert_eq!(table.rows[1].cells_joined(), "63.1 35.2 17.7 9.3");
        assert_eq!(table.rows[2].cells_joined(), "61.9 32.0 15.7 8.2");
        let text = table.to_string();
        assert!(text.starts_with("Model"));
        assert!(text.contains("P-4"));
        assert!(table.to_csv().starts_with("label,P-1,P-2,P-3,P-4\n"));
        assert!(report_table::<f64>(&[]).is_err());
    }

    #[test]
    fn json_emission_fields() {
        let r: PrecisionReport<f64> =
            PrecisionReport::from_counts(vec![5, 3], vec![7, 6], 7, 6).unwrap();
        let v = r.to_json("cat");
        assert_eq!(v["label"], "cat");
        assert_eq!(v["matched"], json!([5, 3]));
        assert_eq!(v["total"], json!([7, 6]));
        assert_eq!(v["p"][0], json!(0.714286));
        assert_eq!(v["c"], 7);
        let csv = reports_csv(&[("cat", &r)]);
        assert!(csv.starts_with("label,p1,p2,bleu1,bleu2,matched1,matched2,total1,total2,bp,c,r\n"));
        assert!(csv.contains("cat,0.714286,0.5,"));
    }

    fn corpus_strategy() -> impl Strategy<Value = Vec<(Vec<u8>, Vec<Vec<u8>>)>> {
        let sentence = proptest::collection::vec(0u8..6, 1..8);
        proptest::collection::vec(
            (sentence.clone(), proptest::collection::vec(sentence, 1..4)),
            1..6,
        )
    }

    fn build(raw: &[(Vec<u8>, Vec<Vec<u8>>)]) -> Vec<(Caption, Vec<Caption>)> {
        let to_caption = |id: &str, s: &[u8]| {
            Caption::new(id, s.iter().map(|w| Token::new(format!("w{w}")).unwrap()).collect())
        };
        raw.iter()
            .enumerate()
            .map(|(i, (c, refs))| {
                let id = i.to_string();
                (to_caption(&id, c), refs.iter().map(|r| to_caption(&id, r)).collect())
            })
            .collect()
    }

    proptest! {
        #[test]
        fn permuting_sentences_changes_nothing(raw in corpus_strategy(), seed: u64) {
            let pairs = build(&raw);
            let a: PrecisionReport<f64> = corpus_precision(&Corpus::from_pairs(pairs.clone()).unwrap(), 4).unwrap();
            let mut shuffled = pairs;
            let len = shuffled.len();
            shuffled.rotate_left((seed as usize) % len);
            shuffled.reverse();
            let refs: Vec<(&Caption, &[Caption])> = shuffled.iter().map(|(c, r)| (c, r.as_slice())).collect();
            let b: PrecisionReport<f64> = precision_of_pairs(&refs, 4).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn adding_a_reference_never_lowers_matches(raw in corpus_strategy(), extra in proptest::collection::vec(0u8..6, 1..8)) {
            let pairs = build(&raw);
            let before: PrecisionReport<f64> = corpus_precision(&Corpus::from_pairs(pairs.clone()).unwrap(), 4).unwrap();
            let mut grown = pairs;
            let extra_caption = Caption::new(
                grown[0].0.example_id.clone(),
                extra.iter().map(|w| Token::new(format!("w{w}")).unwrap()).collect(),
            );
            grown[0].1.push(extra_caption);
            let after: PrecisionReport<f64> = corpus_precision(&Corpus::from_pairs(grown).unwrap(), 4).unwrap();
            for n in 0..4 {
                prop_assert!(after.matched[n] >= before.matched[n]);
            }
        }

        #[test]
        fn deleting_a_matching_token_never_raises_unigram_matches(raw in corpus_strategy(), pick: usize) {
            let pairs = build(&raw);
            let before: PrecisionReport<f64> = corpus_precision(&Corpus::from_pairs(pairs.clone()).unwrap(), 1).unwrap();
            let mut damaged = pairs;
            let (cand, refs) = &mut damaged[0];
            let matching: Vec<usize> = (0..cand.tokens.len())
                .filter(|&i| refs.iter().any(|r| r.tokens.contains(&cand.tokens[i])))
                .collect();
            prop_assume!(!matching.is_empty() && cand.tokens.len() > 1);
            cand.tokens.remove(matching[pick % matching.len()]);
            let after: PrecisionReport<f64> = corpus_precision(&Corpus::from_pairs(damaged).unwrap(), 1).unwrap();
            prop_assert!(after.matched[0] <= before.matched[0]);
        }

        #[test]
        fn report_invariants(raw in corpus_strategy()) {
            let report: PrecisionReport<f64> = corpus_precision(&Corpus::from_pairs(build(&raw)).unwrap(), 4).unwrap();
            for n in 0..4 {
                prop_assert!(report.matched[n] <= report.total[n]);
            }
            let c = report.candidate_length;
            let r = report.effective_reference_length;
            if c >= r {
                prop_assert_eq!(report.brevity_penalty, 1.0);
            } else {
                prop_assert!(report.brevity_penalty < 1.0 && report.brevity_penalty > 0.0);
            }
            for n in 1..=4 {
                let ps = report.precisions();
                let expected = if ps[..n].iter().all(|&p| p > 0.0) {
                    report.brevity_penalty * (ps[..n].iter().map(|p| p.ln()).sum::<f64>() / n as f64).exp()
                } else {
                    0.0
                };
                prop_assert!((report.bleu[n - 1] - expected).abs() <= 1e-12);
            }
        }
    }
}
