//! Classification metrics and inter-model agreement over sentiment labels.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sentiment::Sentiment;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("label vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("no labels to compare")]
    EmptyInput,
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("kappa undefined: chance agreement is 1 but observed agreement is below 1")]
    DegenerateMarginals,
}

/// 3x3 count grid, rows gold and columns predicted, canonical order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn add(&mut self, gold: Sentiment, pred: Sentiment) {
        self.counts[gold.index()][pred.index()] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(other_row) {
                *c += o;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    /// Gold count of `class`.
    pub fn support(&self, class: Sentiment) -> u64 {
        self.counts[class.index()].iter().sum()
    }

    /// Predicted count of `class`.
    pub fn predicted(&self, class: Sentiment) -> u64 {
        self.counts.iter().map(|row| row[class.index()]).sum()
    }
}

fn check_lengths<T>(a: &[T], b: &[T]) -> Result<(), MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    Ok(())
}

pub fn confusion(gold: &[Sentiment], pred: &[Sentiment]) -> Result<ConfusionMatrix, MetricError> {
    check_lengths(gold, pred)?;
    let mut cm = ConfusionMatrix::default();
    for (&g, &p) in gold.iter().zip(pred) {
        cm.add(g, p);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagKind {
    /// Nothing was predicted as this class; precision set to 0.
    PrecisionUndefined,
    /// Class absent from gold; recall set to 0.
    RecallUndefined,
    /// Precision and recall both 0; F1 set to 0.
    F1Undefined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricFlag {
    pub class: Sentiment,
    pub kind: FlagKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: Sentiment,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    pub confusion: ConfusionMatrix,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<MetricFlag>,
}

impl Metrics {
    pub fn class(&self, class: Sentiment) -> &ClassMetrics {
        &self.per_class[class.index()]
    }
}

/// Accuracy, macro/weighted F1 and per-class scores. Zero denominators give
/// a score of 0 and a flag rather than an error.
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics, MetricError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricError::EmptyMatrix);
    }
    let mut flags = Vec::new();
    let mut per_class = Vec::with_capacity(3);
    for class in Sentiment::ALL {
        let tp = cm.counts[class.index()][class.index()];
        let predicted = cm.predicted(class);
        let support = cm.support(class);
        let precision = if predicted == 0 {
            flags.push(MetricFlag {
                class,
                kind: FlagKind::PrecisionUndefined,
            });
            0.0
        } else {
            tp as f64 / predicted as f64
        };
        let recall = if support == 0 {
            flags.push(MetricFlag {
                class,
                kind: FlagKind::RecallUndefined,
            });
            0.0
        } else {
            tp as f64 / support as f64
        };
        let f1 = if precision + recall == 0.0 {
            flags.push(MetricFlag {
                class,
                kind: FlagKind::F1Undefined,
            });
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics {
            class,
            precision,
            recall,
            f1,
            support,
        });
    }
    let macro_f1 = per_class.iter().map(|c| c.f1).sum::<f64>() / 3.0;
    let weighted_f1 = per_class.iter().map(|c| c.f1 * c.support as f64).sum::<f64>() / total as f64;
    Ok(Metrics {
        accuracy: cm.trace() as f64 / total as f64,
        macro_f1,
        weighted_f1,
        per_class,
        confusion: *cm,
        flags,
    })
}

/// Fraction of positions where the two label vectors agree.
pub fn pairwise_agreement(a: &[Sentiment], b: &[Sentiment]) -> Result<f64, MetricError> {
    check_lengths(a, b)?;
    let matches = a.iter().zip(b).filter(|(x, y)| x == y).count();
    Ok(matches as f64 / a.len() as f64)
}

/// Cohen's kappa, `(p_o - p_e) / (1 - p_e)`.
pub fn cohen_kappa(a: &[Sentiment], b: &[Sentiment]) -> Result<f64, MetricError> {
    let cm = confusion(a, b)?;
    let n = cm.total() as f64;
    let p_o = cm.trace() as f64 / n;
    let p_e: f64 = Sentiment::ALL
        .iter()
        .map(|&c| (cm.support(c) as f64 / n) * (cm.predicted(c) as f64 / n))
        .sum();
    if p_e >= 1.0 {
        return if p_o >= 1.0 {
            Ok(1.0)
        } else {
            Err(MetricError::DegenerateMarginals)
        };
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}
