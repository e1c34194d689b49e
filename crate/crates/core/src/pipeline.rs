//! End-to-end fusion: build the corpus-conditioned network over a model set,
//! learn its CPTs on the training partition, and predict records.
//!
//! The network has one `corpus` root, one node per model (child of `corpus`),
//! and a `sentiment` node whose parents are `corpus` followed by the models in
//! configured order. There are no arcs between model nodes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{
    self, order_corpora, to_training_table, DataError, Issue, PredictionRecord, SplitManifest, SplitSpec, CORPUS_NODE,
    SENTIMENT_NODE,
};
use crate::inference::{posterior, InferenceError};
use crate::learning::{fit_cpts, LearnError, SmoothingConfig};
use crate::network::{Assignment, Edge, Network, NetworkError, Skeleton, StateSpace};
use crate::sentiment::{argmax, Sentiment};

pub const DEFAULT_MODELS: [&str; 3] = ["finbert", "roberta", "bertweet"];

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("at least one model is required")]
    EmptyModelList,
    #[error("model `{0}` listed more than once")]
    DuplicateModel(String),
    #[error("model name `{0}` is reserved for a network node")]
    ReservedModelName(String),
    #[error("no corpus states: need at least two corpus tags, found {0:?}")]
    NoCorpusStates(Vec<String>),
    #[error("corpus `{0}` was not seen in training")]
    UnknownCorpusState(String),
    #[error("no training record has predictions from every configured model")]
    NoCompleteRecords,
    #[error("network is not a fusion network: {0}")]
    NotAFusionNetwork(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnlfConfig {
    pub model_names: Vec<String>,
    pub smoothing: SmoothingConfig,
    pub split: SplitSpec,
    /// Declared corpus states; discovered from the training partition when `None`.
    pub corpus_states: Option<Vec<String>>,
}

impl Default for BnlfConfig {
    fn default() -> Self {
        Self {
            model_names: DEFAULT_MODELS.map(String::from).to_vec(),
            smoothing: SmoothingConfig::default(),
            split: SplitSpec::default(),
            corpus_states: None,
        }
    }
}

impl BnlfConfig {
    pub fn with_models<S: Into<String>>(models: impl IntoIterator<Item = S>) -> Self {
        Self {
            model_names: models.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.model_names.is_empty() {
            return Err(PipelineError::EmptyModelList);
        }
        for (i, m) in self.model_names.iter().enumerate() {
            if m == CORPUS_NODE || m == SENTIMENT_NODE {
                return Err(PipelineError::ReservedModelName(m.clone()));
            }
            if self.model_names[..i].contains(m) {
                return Err(PipelineError::DuplicateModel(m.clone()));
            }
        }
        self.smoothing.validate()?;
        Ok(())
    }
}

/// Fusion network structure for the configured models and corpus states.
pub fn build_bnlf_structure(cfg: &BnlfConfig) -> Result<Skeleton, PipelineError> {
    cfg.validate()?;
    let corpora = cfg.corpus_states.clone().unwrap_or_default();
    if corpora.len() < 2 {
        return Err(PipelineError::NoCorpusStates(corpora));
    }
    let sentiment_states = Sentiment::state_names();
    let mut nodes = vec![StateSpace::new(CORPUS_NODE, corpora)?];
    for m in &cfg.model_names {
        nodes.push(StateSpace::new(m.as_str(), sentiment_states)?);
    }
    nodes.push(StateSpace::new(SENTIMENT_NODE, sentiment_states)?);

    let mut edges: Vec<Edge> = cfg
        .model_names
        .iter()
        .map(|m| Edge::new(CORPUS_NODE, m.as_str()))
        .collect();
    edges.push(Edge::new(CORPUS_NODE, SENTIMENT_NODE));
    edges.extend(cfg.model_names.iter().map(|m| Edge::new(m.as_str(), SENTIMENT_NODE)));
    Ok(Skeleton::new(nodes, edges)?)
}

/// Settings stored alongside a fitted network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub models: Vec<String>,
    pub smoothing: SmoothingConfig,
    pub corpus_states: Vec<String>,
    pub split: SplitSpec,
    pub train_records: usize,
    /// Path of the split manifest, relative to the model file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

/// On-disk fitted model: the network document plus a `config` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(flatten)]
    pub network: Network,
    pub config: ModelConfig,
}

impl ModelFile {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("model serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let model: ModelFile = serde_json::from_str(text)?;
        FusionNodes::resolve(&model.network, &model.config.models)?;
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutput {
    pub model: ModelFile,
    pub manifest: SplitManifest,
    /// Training records excluded for missing model predictions.
    pub issues: Vec<Issue>,
}

/// Split, then learn every CPT from the complete training records.
pub fn fit(cfg: &BnlfConfig, records: &[PredictionRecord]) -> Result<FitOutput, PipelineError> {
    cfg.validate()?;
    let partition = data::split(records, &cfg.split)?;
    let (model, issues) = fit_on(cfg, &partition.train)?;
    Ok(FitOutput {
        model,
        manifest: partition.manifest,
        issues,
    })
}

/// Learn the network from an already-selected training set.
pub fn fit_on(cfg: &BnlfConfig, train: &[PredictionRecord]) -> Result<(ModelFile, Vec<Issue>), PipelineError> {
    cfg.validate()?;
    let (table, issues) = to_training_table(train, &cfg.model_names);
    if table.is_empty() {
        return Err(PipelineError::NoCompleteRecords);
    }
    let corpus_states = match &cfg.corpus_states {
        Some(states) => states.clone(),
        None => order_corpora(table.rows().iter().map(|r| r[0].as_str())),
    };
    let resolved = BnlfConfig {
        corpus_states: Some(corpus_states.clone()),
        ..cfg.clone()
    };
    let skeleton = build_bnlf_structure(&resolved)?;
    let network = fit_cpts(&skeleton, &table, cfg.smoothing)?;
    let model = ModelFile {
        network,
        config: ModelConfig {
            models: cfg.model_names.clone(),
            smoothing: cfg.smoothing,
            corpus_states,
            split: cfg.split,
            train_records: table.len(),
            manifest: None,
        },
    };
    Ok((model, issues))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionFlag {
    /// Some configured model had no prediction; it was marginalized out.
    PartialEvidence,
    /// The evidence configuration never occurred in training.
    UnseenConfiguration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub posterior: [f64; 3],
    pub label: Sentiment,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<PredictionFlag>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing_models: Vec<String>,
}

impl Prediction {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("prediction serializes")
    }

    pub fn is_partial(&self) -> bool {
        self.flags.contains(&PredictionFlag::PartialEvidence)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchOutput {
    pub predictions: Vec<Prediction>,
    pub rejected: Vec<Rejection>,
}

impl BatchOutput {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for p in &self.predictions {
            out.push_str(&p.to_json_line());
            out.push('\n');
        }
        out
    }
}

/// Node indices of a fusion network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionNodes {
    pub corpus: usize,
    pub models: Vec<usize>,
    pub sentiment: usize,
}

impl FusionNodes {
    pub fn resolve(net: &Network, models: &[String]) -> Result<Self, PipelineError> {
        let find = |name: &str| {
            net.node_index(name)
                .map_err(|_| PipelineError::NotAFusionNetwork(format!("missing node `{name}`")))
        };
        let nodes = Self {
            corpus: find(CORPUS_NODE)?,
            models: models.iter().map(|m| find(m)).collect::<Result<_, _>>()?,
            sentiment: find(SENTIMENT_NODE)?,
        };
        if net.node(nodes.sentiment).len() != Sentiment::COUNT {
            return Err(PipelineError::NotAFusionNetwork(
                "sentiment node must have three states".into(),
            ));
        }
        Ok(nodes)
    }
}

/// Evidence `{corpus, model_i = label_i}` for one record; missing model labels
/// stay unbound.
pub fn record_evidence(
    net: &Network,
    nodes: &FusionNodes,
    models: &[String],
    record: &PredictionRecord,
) -> Result<(Assignment, Vec<String>), PipelineError> {
    let corpus = net
        .node(nodes.corpus)
        .index_of(&record.corpus)
        .ok_or_else(|| PipelineError::UnknownCorpusState(record.corpus.clone()))?;
    let mut evidence = Assignment::new().with(nodes.corpus, corpus);
    let mut missing = Vec::new();
    for (name, &node) in models.iter().zip(&nodes.models) {
        match record.label(name) {
            Some(label) => {
                evidence.bind(node, net.state_index(node, label.as_str())?);
            }
            None => missing.push(name.clone()),
        }
    }
    Ok((evidence, missing))
}

/// Fused posterior and label for each record. Records with an unknown corpus
/// are rejected; records missing model predictions are marginalized and flagged.
pub fn predict_batch(
    net: &Network,
    records: &[PredictionRecord],
    models: &[String],
) -> Result<BatchOutput, PipelineError> {
    let nodes = FusionNodes::resolve(net, models)?;
    let mut out = BatchOutput::default();
    for record in records {
        let (evidence, missing) = match record_evidence(net, &nodes, models, record) {
            Ok(e) => e,
            Err(e @ PipelineError::UnknownCorpusState(_)) => {
                out.rejected.push(Rejection {
                    id: record.id.clone(),
                    reason: e.to_string(),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let post = posterior(net, nodes.sentiment, &evidence)?;
        let distribution: [f64; 3] = post.distribution.as_slice().try_into().expect("three sentiment states");

        let mut flags = Vec::new();
        if !missing.is_empty() {
            flags.push(PredictionFlag::PartialEvidence);
        } else if let Some(counts) = &net.cpt(nodes.sentiment).counts {
            let row = net.row_index(nodes.sentiment, &evidence)?;
            if counts[row].iter().all(|&c| c == 0) {
                flags.push(PredictionFlag::UnseenConfiguration);
            }
        }
        out.predictions.push(Prediction {
            id: record.id.clone(),
            posterior: distribution,
            label: Sentiment::ALL[argmax(&distribution)],
            flags,
            missing_models: missing,
        });
    }
    Ok(out)
}

/// Parse prediction JSONL as written by [`BatchOutput::to_jsonl`].
pub fn parse_predictions(text: &str) -> Result<Vec<Prediction>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// Predictions keyed by record id.
pub fn index_predictions(predictions: &[Prediction]) -> BTreeMap<&str, &Prediction> {
    predictions.iter().map(|p| (p.id.as_str(), p)).collect()
}
