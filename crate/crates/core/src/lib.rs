//! Decision-level fusion of sentiment classifiers through a discrete Bayesian
//! network conditioned on the source corpus.
//!
//! The building blocks are layered:
//!
//! - [`network`]: validated DAGs with dense CPTs and joint evaluation.
//! - [`learning`]: additive-smoothing CPT estimation from integer counts.
//! - [`inference`]: exact posteriors by enumeration.
//! - [`influence`]: per-arc strength of influence.
//! - [`data`]: prediction records, label remapping, corpus statistics, splits.
//! - [`metrics`], [`ensemble`], [`evaluation`]: scoring and baselines.
//! - [`pipeline`]: fit the fusion network and predict records.

pub mod data;
pub mod ensemble;
pub mod evaluation;
pub mod inference;
pub mod influence;
pub mod learning;
pub mod metrics;
pub mod network;
pub mod pipeline;
pub mod scenario;
pub mod sentiment;
pub mod synthetic;
pub mod table;

pub use data::{parse_records, split, PredictionRecord, SplitManifest, SplitSpec};
pub use evaluation::{evaluate, EvaluationReport};
pub use inference::{posterior, predict_label, Posterior};
pub use influence::{arc_strength, influence_report, Aggregation, DistanceMetric, InfluenceReport, InfluenceSettings};
pub use learning::{fit_cpts, merge_counts, CountTable, SmoothingConfig, TrainingTable};
pub use network::{build_network, Assignment, Cpt, Edge, Network, Skeleton, StateSpace};
pub use pipeline::{build_bnlf_structure, fit, predict_batch, BnlfConfig, ModelFile, Prediction};
pub use sentiment::{LabelMap, Sentiment};
