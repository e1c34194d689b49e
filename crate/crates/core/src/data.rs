//! Prediction records: parsing, validation, corpus statistics, and
//! reproducible train/test splitting.
//!
//! Records are line-delimited JSON:
//!
//! ```json
//! {"id":"tfns-17","corpus":"tfns","text":"...","gold":"bearish",
//!  "preds":{"finbert":{"label":"negative","probs":[0.8,0.15,0.05]}}}
//! ```
//!
//! Splits shuffle the lexicographically sorted id list with a Fisher-Yates
//! pass driven by SplitMix64 seeded with the split seed: for `i` from `n-1`
//! down to `1`, draw `j = next_u64() % (i + 1)` and swap positions `i` and
//! `j`. The first `ceil(n * fraction)` ids form the training partition.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{self, BufRead, Write};

use rand::RngCore;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::learning::TrainingTable;
use crate::sentiment::{argmax, LabelMap, Sentiment};

/// Corpus tags with a fixed canonical position; other tags sort after these.
pub const KNOWN_CORPORA: [&str; 3] = ["financial_phrasebank", "tfns", "fiqa"];

/// Network node holding the corpus tag.
pub const CORPUS_NODE: &str = "corpus";
/// Network node holding the fused sentiment.
pub const SENTIMENT_NODE: &str = "sentiment";

/// Tolerance on the sum of a supplied probability vector.
pub const PROBS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("no records to split")]
    EmptyInput,
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("manifest lists id `{0}` which is not among the records")]
    ManifestMismatch(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPrediction {
    pub label: Sentiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub corpus: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub gold: Sentiment,
    #[serde(default)]
    pub preds: BTreeMap<String, ModelPrediction>,
}

impl PredictionRecord {
    pub fn label(&self, model: &str) -> Option<Sentiment> {
        self.preds.get(model).map(|p| p.label)
    }

    pub fn probs(&self, model: &str) -> Option<[f64; 3]> {
        self.preds.get(model).and_then(|p| p.probs)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// The line was rejected.
    Error,
    /// The line was filtered out by a preprocessing rule.
    Dropped,
    /// The record was kept.
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    MalformedLine,
    UnknownSourceLabel,
    InvalidProbabilities,
    EmptyText,
    DuplicateId,
    LabelProbabilityMismatch,
    UnknownCorpus,
    MissingModelPrediction,
}

impl IssueKind {
    pub fn severity(self) -> Severity {
        match self {
            IssueKind::MalformedLine | IssueKind::UnknownSourceLabel | IssueKind::InvalidProbabilities => {
                Severity::Error
            }
            IssueKind::EmptyText | IssueKind::DuplicateId | IssueKind::MissingModelPrediction => Severity::Dropped,
            IssueKind::LabelProbabilityMismatch | IssueKind::UnknownCorpus => Severity::Warning,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub kind: IssueKind,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(id) = &self.id {
            write!(f, "[{id}] ")?;
        }
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseOutput {
    pub records: Vec<PredictionRecord>,
    pub issues: Vec<Issue>,
}

impl ParseOutput {
    pub fn error_count(&self) -> usize {
        self.issues
            .iter()
            .filter(|i| i.kind.severity() == Severity::Error)
            .count()
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: Value,
    corpus: String,
    #[serde(default)]
    text: Option<String>,
    gold: Value,
    #[serde(default)]
    preds: BTreeMap<String, RawPrediction>,
}

#[derive(Deserialize)]
struct RawPrediction {
    label: Value,
    #[serde(default)]
    probs: Option<Vec<f64>>,
}

fn scalar_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Parse line-delimited JSON records. Bad lines are reported in the issue
/// list and skipped; only I/O failures abort.
pub fn parse_records<R: BufRead>(reader: R, labels: &LabelMap) -> io::Result<ParseOutput> {
    let mut builder = RecordBuilder::new(labels);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        match serde_json::from_str::<RawRecord>(&line) {
            Ok(raw) => builder.accept(raw, line_no),
            Err(e) => builder.issue(Some(line_no), None, IssueKind::MalformedLine, e.to_string()),
        }
    }
    Ok(builder.finish())
}

/// Import records from CSV with columns `id,corpus,text,gold` plus, per model
/// `m`, a label column `m` and optional probability columns `m_negative`,
/// `m_neutral`, `m_positive`.
pub fn parse_csv_records<R: io::Read>(reader: R, labels: &LabelMap) -> Result<ParseOutput, DataError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let fixed = ["id", "corpus", "text", "gold"];
    let models: Vec<String> = headers
        .iter()
        .filter(|h| !fixed.contains(h) && !Sentiment::ALL.iter().any(|s| h.ends_with(&format!("_{s}"))))
        .map(str::to_string)
        .collect();
    let col = |name: &str| headers.iter().position(|h| h == name);

    let mut builder = RecordBuilder::new(labels);
    for (i, row) in rdr.records().enumerate() {
        let line_no = i + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                builder.issue(Some(line_no), None, IssueKind::MalformedLine, e.to_string());
                continue;
            }
        };
        let get = |name: &str| col(name).and_then(|c| row.get(c)).filter(|s| !s.is_empty());
        let (Some(id), Some(corpus), Some(gold)) = (get("id"), get("corpus"), get("gold")) else {
            builder.issue(
                Some(line_no),
                None,
                IssueKind::MalformedLine,
                "missing id, corpus or gold".into(),
            );
            continue;
        };
        let mut preds = BTreeMap::new();
        let mut bad_prob = None;
        for m in &models {
            let Some(label) = get(m) else { continue };
            let cols: Vec<Option<&str>> = Sentiment::ALL.iter().map(|s| get(&format!("{m}_{s}"))).collect();
            let probs = if cols.iter().all(Option::is_some) {
                match cols
                    .iter()
                    .map(|c| c.unwrap().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                {
                    Ok(p) => Some(p),
                    Err(e) => {
                        bad_prob = Some(format!("model `{m}`: {e}"));
                        None
                    }
                }
            } else {
                None
            };
            preds.insert(
                m.clone(),
                RawPrediction {
                    label: Value::String(label.to_string()),
                    probs,
                },
            );
        }
        if let Some(msg) = bad_prob {
            builder.issue(Some(line_no), Some(id.to_string()), IssueKind::MalformedLine, msg);
            continue;
        }
        let raw = RawRecord {
            id: Value::String(id.to_string()),
            corpus: corpus.to_string(),
            text: col("text").and_then(|c| row.get(c)).map(str::to_string),
            gold: Value::String(gold.to_string()),
            preds,
        };
        builder.accept(raw, line_no);
    }
    Ok(builder.finish())
}

struct RecordBuilder<'a> {
    labels: &'a LabelMap,
    seen: HashSet<String>,
    out: ParseOutput,
}

impl<'a> RecordBuilder<'a> {
    fn new(labels: &'a LabelMap) -> Self {
        Self {
            labels,
            seen: HashSet::new(),
            out: ParseOutput::default(),
        }
    }

    fn issue(&mut self, line: Option<usize>, id: Option<String>, kind: IssueKind, message: String) {
        self.out.issues.push(Issue {
            line,
            id,
            kind,
            message,
        });
    }

    fn accept(&mut self, raw: RawRecord, line: usize) {
        let Some(id) = scalar_string(&raw.id) else {
            self.issue(
                Some(line),
                None,
                IssueKind::MalformedLine,
                "id must be a string or number".into(),
            );
            return;
        };
        let id_ref = Some(id.clone());
        if raw.text.as_deref().is_some_and(|t| t.trim().is_empty()) {
            self.issue(Some(line), id_ref, IssueKind::EmptyText, "empty text".into());
            return;
        }
        let gold = match scalar_string(&raw.gold).map(|g| self.labels.map(&g)) {
            Some(Ok(g)) => g,
            Some(Err(e)) => {
                self.issue(Some(line), id_ref, IssueKind::UnknownSourceLabel, format!("gold: {e}"));
                return;
            }
            None => {
                self.issue(
                    Some(line),
                    id_ref,
                    IssueKind::MalformedLine,
                    "gold must be a string or number".into(),
                );
                return;
            }
        };

        let mut preds = BTreeMap::new();
        let mut warnings = Vec::new();
        for (model, p) in raw.preds {
            let label = match scalar_string(&p.label).map(|l| self.labels.map(&l)) {
                Some(Ok(l)) => l,
                Some(Err(e)) => {
                    self.issue(
                        Some(line),
                        id_ref,
                        IssueKind::UnknownSourceLabel,
                        format!("model `{model}`: {e}"),
                    );
                    return;
                }
                None => {
                    self.issue(
                        Some(line),
                        id_ref,
                        IssueKind::MalformedLine,
                        format!("model `{model}`: bad label"),
                    );
                    return;
                }
            };
            let probs = match p.probs {
                None => None,
                Some(v) => match check_probs(&v) {
                    Ok(arr) => {
                        if Sentiment::ALL[argmax(&arr)] != label {
                            warnings.push(format!(
                                "model `{model}`: label {label} is not the argmax of its probabilities"
                            ));
                        }
                        Some(arr)
                    }
                    Err(msg) => {
                        self.issue(
                            Some(line),
                            id_ref,
                            IssueKind::InvalidProbabilities,
                            format!("model `{model}`: {msg}"),
                        );
                        return;
                    }
                },
            };
            preds.insert(model, ModelPrediction { label, probs });
        }

        if !self.seen.insert(id.clone()) {
            self.issue(Some(line), id_ref, IssueKind::DuplicateId, "id already seen".into());
            return;
        }
        for w in warnings {
            self.issue(Some(line), id_ref.clone(), IssueKind::LabelProbabilityMismatch, w);
        }
        let corpus = raw.corpus.trim().to_string();
        if !KNOWN_CORPORA.contains(&corpus.as_str()) {
            self.issue(
                Some(line),
                id_ref,
                IssueKind::UnknownCorpus,
                format!("corpus tag `{corpus}`"),
            );
        }
        self.out.records.push(PredictionRecord {
            id,
            corpus,
            text: raw.text,
            gold,
            preds,
        });
    }

    fn finish(self) -> ParseOutput {
        self.out
    }
}

fn check_probs(v: &[f64]) -> Result<[f64; 3], String> {
    let arr: [f64; 3] = v
        .try_into()
        .map_err(|_| format!("expected 3 probabilities, found {}", v.len()))?;
    if arr.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err("negative or non-finite probability".into());
    }
    let sum: f64 = arr.iter().sum();
    if (sum - 1.0).abs() > PROBS_TOLERANCE {
        return Err(format!("probabilities sum to {sum}"));
    }
    Ok(arr)
}

/// Write records as line-delimited JSON.
pub fn write_records<W: Write>(mut out: W, records: &[PredictionRecord]) -> io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_json_line())?;
    }
    Ok(())
}

/// Sort corpus tags: known corpora in canonical order, then the rest
/// lexicographically. Duplicates are removed.
pub fn order_corpora<'a>(tags: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut unique: Vec<&str> = tags.into_iter().collect::<HashSet<_>>().into_iter().collect();
    unique.sort_by_key(|t| (KNOWN_CORPORA.iter().position(|k| k == t).unwrap_or(usize::MAX), *t));
    unique.into_iter().map(str::to_string).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub corpus: String,
    /// Indexed by canonical sentiment.
    pub counts: [u64; 3],
    pub total: u64,
    /// Percent of `total`, 0 when the row is empty.
    pub percentages: [f64; 3],
}

impl ClassCounts {
    fn new(corpus: &str, counts: [u64; 3]) -> Self {
        let total = counts.iter().sum();
        let percentages = counts.map(|c| {
            if total == 0 {
                0.0
            } else {
                100.0 * c as f64 / total as f64
            }
        });
        Self {
            corpus: corpus.to_string(),
            counts,
            total,
            percentages,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub corpora: Vec<ClassCounts>,
    pub total: ClassCounts,
}

/// Per-corpus gold class distribution. The known corpora always appear,
/// with zero rows if absent.
pub fn validate_dataset_stats(records: &[PredictionRecord]) -> DatasetStats {
    let tags = order_corpora(
        KNOWN_CORPORA
            .iter()
            .copied()
            .chain(records.iter().map(|r| r.corpus.as_str())),
    );
    let mut cells: BTreeMap<&str, [u64; 3]> = tags.iter().map(|t| (t.as_str(), [0; 3])).collect();
    let mut total = [0u64; 3];
    for r in records {
        cells.get_mut(r.corpus.as_str()).expect("tag collected")[r.gold.index()] += 1;
        total[r.gold.index()] += 1;
    }
    DatasetStats {
        corpora: tags.iter().map(|t| ClassCounts::new(t, cells[t.as_str()])).collect(),
        total: ClassCounts::new("total", total),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    /// Split each gold class separately.
    #[serde(default)]
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 0,
            stratified: false,
        }
    }
}

/// Persisted record of which ids went to which partition. Id lists are sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub fraction: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub stratified: bool,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
}

impl SplitManifest {
    /// Partition `records` according to this manifest. Records whose ids are
    /// listed in neither partition are ignored.
    pub fn apply(&self, records: &[PredictionRecord]) -> Result<Partition, DataError> {
        let by_id: BTreeMap<&str, &PredictionRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
        let pick = |ids: &[String]| {
            ids.iter()
                .map(|id| {
                    by_id
                        .get(id.as_str())
                        .map(|r| (*r).clone())
                        .ok_or_else(|| DataError::ManifestMismatch(id.clone()))
                })
                .collect::<Result<Vec<_>, _>>()
        };
        Ok(Partition {
            train: pick(&self.train_ids)?,
            test: pick(&self.test_ids)?,
            manifest: self.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub train: Vec<PredictionRecord>,
    pub test: Vec<PredictionRecord>,
    pub manifest: SplitManifest,
}

/// Number of training items for `n` items at `fraction`: `ceil(n * fraction)`.
pub fn train_size(n: usize, fraction: f64) -> usize {
    // guard against 0.8 * 10 landing a hair above 8
    ((n as f64 * fraction - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Fisher-Yates shuffle driven by SplitMix64.
pub fn seeded_shuffle<T>(items: &mut [T], seed: u64) {
    let mut rng = SplitMix64::seed_from_u64(seed);
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

/// Deterministic train/test split keyed by `spec.seed` over sorted ids.
pub fn split(records: &[PredictionRecord], spec: &SplitSpec) -> Result<Partition, DataError> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(DataError::InvalidFraction(spec.train_fraction));
    }
    if records.is_empty() {
        return Err(DataError::EmptyInput);
    }

    let groups: Vec<Vec<&PredictionRecord>> = if spec.stratified {
        Sentiment::ALL
            .iter()
            .map(|&s| records.iter().filter(|r| r.gold == s).collect())
            .collect()
    } else {
        vec![records.iter().collect()]
    };

    let mut train_ids = Vec::new();
    let mut test_ids = Vec::new();
    for (g, group) in groups.into_iter().enumerate() {
        let mut ids: Vec<&str> = group.iter().map(|r| r.id.as_str()).collect();
        ids.sort_unstable();
        seeded_shuffle(&mut ids, spec.seed.wrapping_add(g as u64));
        let k = train_size(ids.len(), spec.train_fraction);
        train_ids.extend(ids[..k].iter().map(|s| s.to_string()));
        test_ids.extend(ids[k..].iter().map(|s| s.to_string()));
    }
    train_ids.sort_unstable();
    test_ids.sort_unstable();

    let manifest = SplitManifest {
        seed: spec.seed,
        fraction: spec.train_fraction,
        stratified: spec.stratified,
        train_ids,
        test_ids,
    };
    manifest.apply(records)
}

/// Project records onto `[corpus, model_1..model_k, sentiment]` rows.
/// Records lacking any named model prediction are excluded and reported.
pub fn to_training_table(records: &[PredictionRecord], model_names: &[String]) -> (TrainingTable, Vec<Issue>) {
    let columns = std::iter::once(CORPUS_NODE.to_string())
        .chain(model_names.iter().cloned())
        .chain(std::iter::once(SENTIMENT_NODE.to_string()));
    let mut table = TrainingTable::new(columns);
    let mut issues = Vec::new();
    for r in records {
        let labels: Option<Vec<&str>> = model_names.iter().map(|m| r.label(m).map(Sentiment::as_str)).collect();
        match labels {
            Some(labels) => {
                let row = std::iter::once(r.corpus.as_str())
                    .chain(labels)
                    .chain(std::iter::once(r.gold.as_str()));
                table.push_row(row).expect("row width matches columns");
            }
            None => {
                let missing: Vec<&str> = model_names
                    .iter()
                    .filter(|m| r.label(m).is_none())
                    .map(String::as_str)
                    .collect();
                issues.push(Issue {
                    line: None,
                    id: Some(r.id.clone()),
                    kind: IssueKind::MissingModelPrediction,
                    message: format!("missing predictions for {}", missing.join(", ")),
                });
            }
        }
    }
    (table, issues)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ParseOutput {
        parse_records(text.as_bytes(), &LabelMap::default()).unwrap()
    }

    fn record(id: &str, corpus: &str, gold: Sentiment) -> PredictionRecord {
        PredictionRecord {
            id: id.into(),
            corpus: corpus.into(),
            text: None,
            gold,
            preds: BTreeMap::new(),
        }
    }

    #[test]
    fn bearish_maps_to_negative() {
        let out = parse(r#"{"id":"t1","corpus":"tfns","text":"down","gold":"bearish","preds":{}}"#);
        assert!(out.issues.is_empty());
        assert_eq!(out.records[0].gold, Sentiment::Negative);
    }

    #[test]
    fn empty_text_dropped() {
        let out = parse(
            r#"{"id":"a","corpus":"tfns","text":"  ","gold":"neutral"}
{"id":"b","corpus":"tfns","text":"ok","gold":"neutral"}"#,
        );
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.issues[0].kind, IssueKind::EmptyText);
        assert_eq!(out.issues[0].line, Some(1));
    }

    #[test]
    fn duplicate_id_second_dropped() {
        let out = parse(
            r#"{"id":"a","corpus":"tfns","gold":"neutral"}
{"id":"a","corpus":"fiqa","gold":"positive"}"#,
        );
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].corpus, "tfns");
        assert_eq!(out.issues[0].kind, IssueKind::DuplicateId);
    }

    #[test]
    fn malformed_line_does_not_abort() {
        let out = parse(
            r#"{"id":"a","corpus":"tfns","gold":"neutral"
{"id":"b","corpus":"tfns","gold":"mixed"}
{"id":"c","corpus":"tfns","gold":1}"#,
        );
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].gold, Sentiment::Neutral);
        assert_eq!(out.issues[0].kind, IssueKind::MalformedLine);
        assert_eq!(out.issues[1].kind, IssueKind::UnknownSourceLabel);
        assert_eq!(out.error_count(), 2);
    }

    #[test]
    fn probability_checks() {
        let out = parse(
            r#"{"id":"a","corpus":"tfns","gold":"neutral","preds":{"m":{"label":"neutral","probs":[0.2,0.2,0.2]}}}
{"id":"b","corpus":"tfns","gold":"neutral","preds":{"m":{"label":"positive","probs":[0.2,0.5,0.3]}}}"#,
        );
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.issues[0].kind, IssueKind::InvalidProbabilities);
        assert_eq!(out.issues[1].kind, IssueKind::LabelProbabilityMismatch);
    }

    #[test]
    fn unknown_corpus_flagged_but_kept() {
        let out = parse(r#"{"id":"a","corpus":"reddit","gold":"neutral"}"#);
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.issues[0].kind, IssueKind::UnknownCorpus);
        assert_eq!(out.error_count(), 0);
    }

    #[test]
    fn csv_import() {
        let csv = "id,corpus,text,gold,finbert,finbert_negative,finbert_neutral,finbert_positive,roberta\n\
                   1,tfns,hi,bullish,positive,0.1,0.2,0.7,neutral\n\
                   2,fiqa,yo,negative,negative,,,,negative\n";
        let out = parse_csv_records(csv.as_bytes(), &LabelMap::default()).unwrap();
        assert!(out.issues.is_empty(), "{:?}", out.issues);
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[0].probs("finbert"), Some([0.1, 0.2, 0.7]));
        assert_eq!(out.records[0].label("roberta"), Some(Sentiment::Neutral));
        assert_eq!(out.records[1].probs("finbert"), None);
    }

    #[test]
    fn stats_of_empty_input() {
        let stats = validate_dataset_stats(&[]);
        assert_eq!(stats.corpora.len(), 3);
        assert_eq!(stats.total.counts, [0, 0, 0]);
        assert_eq!(stats.total.percentages, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn stats_percentages() {
        let recs = vec![
            record("1", "fiqa", Sentiment::Negative),
            record("2", "fiqa", Sentiment::Negative),
            record("3", "fiqa", Sentiment::Positive),
            record("4", "tfns", Sentiment::Neutral),
        ];
        let stats = validate_dataset_stats(&recs);
        let fiqa = &stats.corpora[2];
        assert_eq!(fiqa.corpus, "fiqa");
        assert_eq!(fiqa.counts, [2, 0, 1]);
        assert!((fiqa.percentages[0] - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(stats.total.total, 4);
    }

    #[test]
    fn corpus_order() {
        assert_eq!(
            order_corpora(["zeta", "fiqa", "alpha", "financial_phrasebank", "fiqa"]),
            vec!["financial_phrasebank", "fiqa", "alpha", "zeta"]
        );
    }

    #[test]
    fn train_size_rounding() {
        assert_eq!(train_size(10, 0.8), 8);
        assert_eq!(train_size(15_408, 0.8), 12_327);
        assert_eq!(train_size(5, 0.6), 3);
        assert_eq!(train_size(1, 0.5), 1);
    }

    #[test]
    fn split_is_deterministic() {
        let recs: Vec<_> = (0..10)
            .map(|i| record(&format!("r{i}"), "tfns", Sentiment::Neutral))
            .collect();
        let spec = SplitSpec::default();
        let a = split(&recs, &spec).unwrap();
        let b = split(&recs, &spec).unwrap();
        assert_eq!(a.train.len(), 8);
        assert_eq!(a.test.len(), 2);
        assert_eq!(a.manifest, b.manifest);
        let c = split(&recs, &SplitSpec { seed: 7, ..spec }).unwrap();
        assert_ne!(a.manifest, c.manifest);
        assert_eq!(c.train.len(), 8);
    }

    #[test]
    fn split_errors() {
        assert!(matches!(split(&[], &SplitSpec::default()), Err(DataError::EmptyInput)));
        let recs = vec![record("a", "tfns", Sentiment::Neutral)];
        for f in [0.0, 1.0, -0.5, f64::NAN] {
            let spec = SplitSpec {
                train_fraction: f,
                ..Default::default()
            };
            assert!(matches!(split(&recs, &spec), Err(DataError::InvalidFraction(_))));
        }
    }

    #[test]
    fn stratified_split_per_class() {
        let mut recs = Vec::new();
        for i in 0..10 {
            recs.push(record(&format!("n{i}"), "tfns", Sentiment::Negative));
        }
        for i in 0..5 {
            recs.push(record(&format!("p{i}"), "tfns", Sentiment::Positive));
        }
        let spec = SplitSpec {
            stratified: true,
            ..Default::default()
        };
        let part = split(&recs, &spec).unwrap();
        let train_pos = part.train.iter().filter(|r| r.gold == Sentiment::Positive).count();
        assert_eq!(train_pos, 4);
        assert_eq!(part.train.len(), 12);
    }

    #[test]
    fn training_table_projection() {
        let mut r = record("x", "tfns", Sentiment::Positive);
        for (m, l) in [
            ("finbert", Sentiment::Negative),
            ("roberta", Sentiment::Neutral),
            ("bertweet", Sentiment::Positive),
        ] {
            r.preds.insert(m.into(), ModelPrediction { label: l, probs: None });
        }
        let mut missing = r.clone();
        missing.id = "y".into();
        missing.preds.remove("roberta");
        let models: Vec<String> = ["finbert", "roberta", "bertweet"].map(String::from).to_vec();
        let (table, issues) = to_training_table(&[r, missing], &models);
        assert_eq!(
            table.columns(),
            &["corpus", "finbert", "roberta", "bertweet", "sentiment"]
        );
        assert_eq!(
            table.rows(),
            &[vec!["tfns", "negative", "neutral", "positive", "positive"]]
        );
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].kind, IssueKind::MissingModelPrediction);
    }
}
