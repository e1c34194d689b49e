//! CPT estimation from complete training data with additive smoothing.
//!
//! Counting and normalization are separate steps: [`CountTable`] holds exact
//! integer occurrence counts, which can be produced per shard and combined
//! with [`merge_counts`] before [`fit_from_counts`] turns them into
//! probabilities `(count + alpha) / (row_total + alpha * states)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Cpt, Network, NetworkError, Skeleton};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("training table is empty")]
    EmptyTrainingTable,
    #[error("training table has no column for node `{0}`")]
    MissingColumn(String),
    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow { row: usize, found: usize, expected: usize },
    #[error("row {row}: `{value}` is not a state of node `{node}`")]
    UnknownStateValue { row: usize, node: String, value: String },
    #[error("count tables address different structures")]
    StructureMismatch,
    #[error("smoothing parameter must be positive and finite, got {0}")]
    InvalidSmoothing(f64),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Complete-data training table; cells are state names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrainingTable {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl TrainingTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) -> Result<(), LearnError> {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        if row.len() != self.columns.len() {
            return Err(LearnError::RaggedRow {
                row: self.rows.len(),
                found: row.len(),
                expected: self.columns.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Pseudo-count prior added to every (row, child-state) cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingConfig {
    /// Fixed pseudo-count per cell; `Additive(1.0)` is Laplace smoothing.
    Additive(f64),
    /// Equivalent sample size spread over a node's rows: each cell receives
    /// `ess / row_count`.
    EquivalentSampleSize(f64),
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig::Additive(1.0)
    }
}

impl SmoothingConfig {
    pub fn additive(alpha: f64) -> Result<Self, LearnError> {
        let cfg = SmoothingConfig::Additive(alpha);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        let v = match *self {
            SmoothingConfig::Additive(a) => a,
            SmoothingConfig::EquivalentSampleSize(e) => e,
        };
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(LearnError::InvalidSmoothing(v))
        }
    }

    /// Per-cell pseudo-count for a node whose CPT has `row_count` rows.
    pub fn alpha_for(&self, row_count: usize) -> f64 {
        match *self {
            SmoothingConfig::Additive(a) => a,
            SmoothingConfig::EquivalentSampleSize(e) => e / row_count as f64,
        }
    }
}

/// Identity of one node's slot in a count table.
#[derive(Debug, Clone, PartialEq, Eq)]
struct NodeShape {
    name: String,
    states: Vec<String>,
    parents: Vec<String>,
}

/// Integer occurrence counts for every CPT cell of a skeleton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    shapes: Vec<NodeShape>,
    /// `cells[node][row][state]`
    cells: Vec<Vec<Vec<u64>>>,
    records: u64,
}

impl CountTable {
    /// All-zero counts for `skeleton`.
    pub fn zeros(skeleton: &Skeleton) -> Self {
        let mut shapes = Vec::with_capacity(skeleton.node_count());
        let mut cells = Vec::with_capacity(skeleton.node_count());
        for i in 0..skeleton.node_count() {
            let node = skeleton.node(i);
            shapes.push(NodeShape {
                name: node.name().to_string(),
                states: node.states().to_vec(),
                parents: skeleton
                    .parents(i)
                    .iter()
                    .map(|&p| skeleton.node(p).name().to_string())
                    .collect(),
            });
            cells.push(vec![vec![0; node.len()]; skeleton.row_count(i)]);
        }
        Self {
            shapes,
            cells,
            records: 0,
        }
    }

    /// Count every row of `data` against `skeleton`.
    pub fn count(skeleton: &Skeleton, data: &TrainingTable) -> Result<Self, LearnError> {
        let columns: Vec<usize> = (0..skeleton.node_count())
            .map(|i| {
                let name = skeleton.node(i).name();
                data.columns()
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| LearnError::MissingColumn(name.to_string()))
            })
            .collect::<Result<_, _>>()?;

        let mut table = Self::zeros(skeleton);
        let mut states = vec![0; skeleton.node_count()];
        for (r, row) in data.rows().iter().enumerate() {
            for (node, &col) in columns.iter().enumerate() {
                let space = skeleton.node(node);
                states[node] = space.index_of(&row[col]).ok_or_else(|| LearnError::UnknownStateValue {
                    row: r,
                    node: space.name().to_string(),
                    value: row[col].clone(),
                })?;
            }
            table.observe(skeleton, &states);
        }
        Ok(table)
    }

    /// Add one complete record given as a dense state vector.
    pub fn observe(&mut self, skeleton: &Skeleton, states: &[usize]) {
        for node in 0..skeleton.node_count() {
            let mut row = 0;
            for &p in skeleton.parents(node) {
                row = row * skeleton.node(p).len() + states[p];
            }
            self.cells[node][row][states[node]] += 1;
        }
        self.records += 1;
    }

    /// Counts for `node`, indexed `[row][state]`.
    pub fn node_counts(&self, node: usize) -> &[Vec<u64>] {
        &self.cells[node]
    }

    /// Number of records counted.
    pub fn records(&self) -> u64 {
        self.records
    }

    fn same_structure(&self, other: &CountTable) -> bool {
        self.shapes == other.shapes
    }

    fn matches(&self, skeleton: &Skeleton) -> bool {
        self.same_structure(&CountTable::zeros(skeleton))
    }
}

/// Cell-wise sum of two count tables over the same structure.
pub fn merge_counts(a: &CountTable, b: &CountTable) -> Result<CountTable, LearnError> {
    if !a.same_structure(b) {
        return Err(LearnError::StructureMismatch);
    }
    let mut out = a.clone();
    for (node_out, node_b) in out.cells.iter_mut().zip(&b.cells) {
        for (row_out, row_b) in node_out.iter_mut().zip(node_b) {
            for (c, &d) in row_out.iter_mut().zip(row_b) {
                *c += d;
            }
        }
    }
    out.records += b.records;
    Ok(out)
}

/// Normalize counts into a network. Every row is defined, uniform where the
/// parent configuration was never observed.
pub fn fit_from_counts(skeleton: &Skeleton, counts: &CountTable, cfg: SmoothingConfig) -> Result<Network, LearnError> {
    cfg.validate()?;
    if !counts.matches(skeleton) {
        return Err(LearnError::StructureMismatch);
    }
    let cpts = (0..skeleton.node_count())
        .map(|i| {
            let node_counts = counts.node_counts(i);
            let alpha = cfg.alpha_for(node_counts.len());
            let states = skeleton.node(i).len() as f64;
            let rows = node_counts
                .iter()
                .map(|row| {
                    let total = row.iter().sum::<u64>() as f64;
                    let denom = total + alpha * states;
                    row.iter().map(|&c| (c as f64 + alpha) / denom).collect()
                })
                .collect();
            Cpt {
                child: skeleton.node(i).name().to_string(),
                parents: skeleton
                    .parents(i)
                    .iter()
                    .map(|&p| skeleton.node(p).name().to_string())
                    .collect(),
                rows,
                alpha: Some(alpha),
                counts: Some(node_counts.to_vec()),
            }
        })
        .collect();
    Ok(skeleton.clone().with_cpts(cpts)?)
}

/// Count and normalize in one step.
pub fn fit_cpts(skeleton: &Skeleton, data: &TrainingTable, cfg: SmoothingConfig) -> Result<Network, LearnError> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(LearnError::EmptyTrainingTable);
    }
    let counts = CountTable::count(skeleton, data)?;
    fit_from_counts(skeleton, &counts, cfg)
}
