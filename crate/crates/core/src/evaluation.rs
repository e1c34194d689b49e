//! Side-by-side evaluation of individual models, the two ensemble baselines,
//! and the fused predictor.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{order_corpora, PredictionRecord};
use crate::ensemble::{majority_vote, probability_average, EnsembleError};
use crate::metrics::{cohen_kappa, confusion, metrics, pairwise_agreement, MetricError, Metrics};
use crate::pipeline::{index_predictions, Prediction};
use crate::sentiment::Sentiment;
use crate::table::{fmt4, Table};

pub const MAJORITY: &str = "majority";
pub const AVERAGING: &str = "averaging";
pub const BNLF: &str = "bnlf";
/// Fused predictions restricted to records with every model observed.
pub const BNLF_COMPLETE: &str = "bnlf_complete";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no records to evaluate")]
    EmptyInput,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Individual,
    Ensemble,
    Fusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMetrics {
    pub corpus: String,
    pub evaluated: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub name: String,
    pub kind: MethodKind,
    pub evaluated: usize,
    /// Records this method could not label (missing predictions or probabilities).
    pub excluded: usize,
    pub overall: Option<Metrics>,
    pub per_corpus: Vec<CorpusMetrics>,
}

/// Pairwise agreement (proportion of matching labels) and Cohen's kappa
/// between label sources, computed over records both sources labeled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementMatrix {
    pub sources: Vec<String>,
    pub agreement: Vec<Vec<Option<f64>>>,
    pub kappa: Vec<Vec<Option<f64>>>,
    /// Mean over the other sources, self excluded.
    pub mean_agreement: Vec<Option<f64>>,
    pub mean_kappa: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub records: usize,
    pub corpora: Vec<String>,
    pub fusion_models: Vec<String>,
    pub methods: Vec<MethodResult>,
    pub agreement: AgreementMatrix,
}

impl EvaluationReport {
    pub fn method(&self, name: &str) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn accuracy(&self, name: &str) -> Option<f64> {
        self.method(name)?.overall.as_ref().map(|m| m.accuracy)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn tables(&self) -> Vec<Table> {
        vec![
            self.overall_table(),
            self.corpus_table(),
            self.class_table(),
            self.agreement_table(),
        ]
    }

    pub fn overall_table(&self) -> Table {
        let mut t = Table::new(
            "Overall performance",
            ["Method", "N", "Excluded", "Accuracy", "Macro-F1", "Weighted-F1"],
        );
        for m in &self.methods {
            let (acc, mac, wei) = match &m.overall {
                Some(x) => (fmt4(x.accuracy), fmt4(x.macro_f1), fmt4(x.weighted_f1)),
                None => ("-".into(), "-".into(), "-".into()),
            };
            t.push([
                m.name.clone(),
                m.evaluated.to_string(),
                m.excluded.to_string(),
                acc,
                mac,
                wei,
            ]);
        }
        t
    }

    pub fn corpus_table(&self) -> Table {
        let mut t = Table::new(
            "Performance by corpus",
            ["Corpus", "Method", "N", "Accuracy", "Macro-F1", "Weighted-F1"],
        );
        for corpus in &self.corpora {
            for m in &self.methods {
                if let Some(c) = m.per_corpus.iter().find(|c| &c.corpus == corpus) {
                    t.push([
                        corpus.clone(),
                        m.name.clone(),
                        c.evaluated.to_string(),
                        fmt4(c.metrics.accuracy),
                        fmt4(c.metrics.macro_f1),
                        fmt4(c.metrics.weighted_f1),
                    ]);
                }
            }
        }
        t
    }

    pub fn class_table(&self) -> Table {
        let mut t = Table::new(
            "Per-class metrics",
            ["Method", "Class", "Precision", "Recall", "F1", "Support", "Flags"],
        );
        for m in &self.methods {
            let Some(overall) = &m.overall else { continue };
            for c in &overall.per_class {
                let flags: Vec<String> = overall
                    .flags
                    .iter()
                    .filter(|f| f.class == c.class)
                    .map(|f| format!("{:?}", f.kind))
                    .collect();
                t.push([
                    m.name.clone(),
                    c.class.to_string(),
                    fmt4(c.precision),
                    fmt4(c.recall),
                    fmt4(c.f1),
                    c.support.to_string(),
                    flags.join(" "),
                ]);
            }
        }
        t
    }

    /// Cells read `agreement (kappa)`.
    pub fn agreement_table(&self) -> Table {
        let a = &self.agreement;
        let headers = std::iter::once("Source".to_string())
            .chain(a.sources.iter().cloned())
            .chain(std::iter::once("Mean".to_string()));
        let mut t = Table::new("Pairwise agreement (Cohen's kappa)", headers);
        let cell = |p: Option<f64>, k: Option<f64>| match (p, k) {
            (Some(p), Some(k)) => format!("{} ({})", fmt4(p), fmt4(k)),
            (Some(p), None) => format!("{} (-)", fmt4(p)),
            _ => "-".to_string(),
        };
        for (i, name) in a.sources.iter().enumerate() {
            let mut row = vec![name.clone()];
            for j in 0..a.sources.len() {
                row.push(cell(a.agreement[i][j], a.kappa[i][j]));
            }
            row.push(cell(a.mean_agreement[i], a.mean_kappa[i]));
            t.push(row);
        }
        t
    }
}

/// One method's labels, `None` where it abstains.
struct Column {
    name: String,
    kind: MethodKind,
    labels: Vec<Option<Sentiment>>,
}

/// Evaluate every individual model found in `records`, majority voting and
/// probability averaging over `fusion_models` (first model is the voting
/// fallback), and the fused predictions when supplied.
pub fn evaluate(
    records: &[PredictionRecord],
    fusion_models: &[String],
    fused: Option<&[Prediction]>,
) -> Result<EvaluationReport, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyInput);
    }

    let extra: BTreeSet<&str> = records
        .iter()
        .flat_map(|r| r.preds.keys().map(String::as_str))
        .filter(|m| !fusion_models.iter().any(|f| f == m))
        .collect();
    let individual: Vec<String> = fusion_models
        .iter()
        .cloned()
        .chain(extra.into_iter().map(str::to_string))
        .collect();

    let mut columns: Vec<Column> = individual
        .iter()
        .map(|m| Column {
            name: m.clone(),
            kind: MethodKind::Individual,
            labels: records.iter().map(|r| r.label(m)).collect(),
        })
        .collect();

    if fusion_models.len() >= 2 {
        let fallback = &fusion_models[0];
        let labels = records
            .iter()
            .map(|r| {
                let preds: Option<Vec<(&str, Sentiment)>> = fusion_models
                    .iter()
                    .map(|m| r.label(m).map(|l| (m.as_str(), l)))
                    .collect();
                preds.map(|p| majority_vote(&p, fallback)).transpose()
            })
            .collect::<Result<_, _>>()?;
        columns.push(Column {
            name: MAJORITY.into(),
            kind: MethodKind::Ensemble,
            labels,
        });
    }

    if !fusion_models.is_empty() {
        let labels = records
            .iter()
            .map(|r| {
                let probs: Option<Vec<[f64; 3]>> = fusion_models.iter().map(|m| r.probs(m)).collect();
                probs.map(|p| probability_average(&p).map(|(_, l)| l)).transpose()
            })
            .collect::<Result<_, _>>()?;
        columns.push(Column {
            name: AVERAGING.into(),
            kind: MethodKind::Ensemble,
            labels,
        });
    }

    let mut agreement_sources: Vec<usize> = (0..individual.len()).collect();
    if let Some(preds) = fused {
        let by_id = index_predictions(preds);
        let found: Vec<Option<&Prediction>> = records.iter().map(|r| by_id.get(r.id.as_str()).copied()).collect();
        agreement_sources.push(columns.len());
        columns.push(Column {
            name: BNLF.into(),
            kind: MethodKind::Fusion,
            labels: found.iter().map(|p| p.map(|p| p.label)).collect(),
        });
        if found.iter().flatten().any(|p| p.is_partial()) {
            columns.push(Column {
                name: BNLF_COMPLETE.into(),
                kind: MethodKind::Fusion,
                labels: found
                    .iter()
                    .map(|p| p.filter(|p| !p.is_partial()).map(|p| p.label))
                    .collect(),
            });
        }
    }

    let corpora = order_corpora(records.iter().map(|r| r.corpus.as_str()));
    let methods = columns
        .iter()
        .map(|c| score_column(records, &corpora, c))
        .collect::<Result<_, _>>()?;
    let agreement_columns: Vec<&Column> = agreement_sources.iter().map(|&i| &columns[i]).collect();
    let agreement = agreement_matrix(&agreement_columns)?;

    Ok(EvaluationReport {
        records: records.len(),
        corpora,
        fusion_models: fusion_models.to_vec(),
        methods,
        agreement,
    })
}

fn score_subset(
    records: &[PredictionRecord],
    labels: &[Option<Sentiment>],
    keep: impl Fn(&PredictionRecord) -> bool,
) -> Result<(usize, Option<Metrics>), EvalError> {
    let (gold, pred): (Vec<Sentiment>, Vec<Sentiment>) = records
        .iter()
        .zip(labels)
        .filter(|(r, _)| keep(r))
        .filter_map(|(r, l)| l.map(|l| (r.gold, l)))
        .unzip();
    if gold.is_empty() {
        return Ok((0, None));
    }
    let m = metrics(&confusion(&gold, &pred)?)?;
    Ok((gold.len(), Some(m)))
}

fn score_column(records: &[PredictionRecord], corpora: &[String], column: &Column) -> Result<MethodResult, EvalError> {
    let (evaluated, overall) = score_subset(records, &column.labels, |_| true)?;
    let mut per_corpus = Vec::new();
    for corpus in corpora {
        if let (n, Some(metrics)) = score_subset(records, &column.labels, |r| &r.corpus == corpus)? {
            per_corpus.push(CorpusMetrics {
                corpus: corpus.clone(),
                evaluated: n,
                metrics,
            });
        }
    }
    Ok(MethodResult {
        name: column.name.clone(),
        kind: column.kind,
        evaluated,
        excluded: records.len() - evaluated,
        overall,
        per_corpus,
    })
}

fn agreement_matrix(columns: &[&Column]) -> Result<AgreementMatrix, EvalError> {
    let n = columns.len();
    let mut agreement = vec![vec![None; n]; n];
    let mut kappa = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i..n {
            let (a, b): (Vec<Sentiment>, Vec<Sentiment>) = columns[i]
                .labels
                .iter()
                .zip(&columns[j].labels)
                .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
                .unzip();
            if a.is_empty() {
                continue;
            }
            let p = pairwise_agreement(&a, &b)?;
            let k = if i == j {
                Some(1.0)
            } else {
                match cohen_kappa(&a, &b) {
                    Ok(k) => Some(k),
                    Err(MetricError::DegenerateMarginals) => None,
                    Err(e) => return Err(e.into()),
                }
            };
            agreement[i][j] = Some(p);
            agreement[j][i] = Some(p);
            kappa[i][j] = k;
            kappa[j][i] = k;
        }
    }
    let mean_off_diagonal = |grid: &Vec<Vec<Option<f64>>>| -> Vec<Option<f64>> {
        (0..n)
            .map(|i| {
                let vals: Vec<f64> = (0..n).filter(|&j| j != i).filter_map(|j| grid[i][j]).collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            })
            .collect()
    };
    Ok(AgreementMatrix {
        sources: columns.iter().map(|c| c.name.clone()).collect(),
        mean_agreement: mean_off_diagonal(&agreement),
        mean_kappa: mean_off_diagonal(&kappa),
        agreement,
        kappa,
    })
}
