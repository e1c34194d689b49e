//! Discrete Bayesian networks.
//!
//! A [`Network`] is an immutable DAG over named discrete variables, with one
//! dense conditional probability table per node. CPT rows are addressed by a
//! mixed-radix encoding of the parent states in the CPT's declared parent
//! order, first parent most significant.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for a CPT row to count as normalized.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("node `{node}` declares state `{state}` more than once")]
    DuplicateState { node: String, state: String },
    #[error("node `{0}` must have at least two states")]
    TooFewStates(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{node}` has no state `{state}`")]
    UnknownState { node: String, state: String },
    #[error("state index {index} out of range for node `{node}`")]
    StateOutOfRange { node: String, index: usize },
    #[error("edge {from} -> {to} declared more than once")]
    DuplicateEdge { from: String, to: String },
    #[error("edges contain a directed cycle through {0:?}")]
    CycleDetected(Vec<String>),
    #[error("CPT for `{node}` is invalid: {reason}")]
    CptMismatch { node: String, reason: String },
    #[error("parent configuration for `{node}` does not bind parent `{missing}`")]
    IncompleteParentConfig { node: String, missing: String },
    #[error("assignment does not bind node `{0}`")]
    IncompleteAssignment(String),
}

/// A named discrete variable with an ordered, fixed list of states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSpace {
    name: String,
    states: Vec<String>,
}

impl StateSpace {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        states: impl IntoIterator<Item = S>,
    ) -> Result<Self, NetworkError> {
        let space = Self {
            name: name.into(),
            states: states.into_iter().map(Into::into).collect(),
        };
        space.validate()?;
        Ok(space)
    }

    fn validate(&self) -> Result<(), NetworkError> {
        if self.states.len() < 2 {
            return Err(NetworkError::TooFewStates(self.name.clone()));
        }
        let mut seen = HashSet::new();
        for s in &self.states {
            if !seen.insert(s.as_str()) {
                return Err(NetworkError::DuplicateState {
                    node: self.name.clone(),
                    state: s.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

/// Directed arc `from -> to`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
        }
    }
}

/// Conditional probability table for one node.
///
/// `rows[k]` is the distribution over the child's states for the parent
/// configuration with mixed-radix index `k`. Learned tables also carry the
/// smoothing pseudo-count and the raw integer counts they were built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    pub child: String,
    pub parents: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<Vec<u64>>>,
}

impl Cpt {
    pub fn new<S: Into<String>>(
        child: impl Into<String>,
        parents: impl IntoIterator<Item = S>,
        rows: Vec<Vec<f64>>,
    ) -> Self {
        Self {
            child: child.into(),
            parents: parents.into_iter().map(Into::into).collect(),
            rows,
            alpha: None,
            counts: None,
        }
    }

    /// Single-row table for a parentless node.
    pub fn prior(child: impl Into<String>, distribution: Vec<f64>) -> Self {
        Self::new(child, Vec::<String>::new(), vec![distribution])
    }
}

/// Partial assignment of states to nodes, both by index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    bindings: BTreeMap<usize, usize>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, node: usize, state: usize) -> Self {
        self.bindings.insert(node, state);
        self
    }

    pub fn bind(&mut self, node: usize, state: usize) -> Option<usize> {
        self.bindings.insert(node, state)
    }

    pub fn unbind(&mut self, node: usize) -> Option<usize> {
        self.bindings.remove(&node)
    }

    pub fn get(&self, node: usize) -> Option<usize> {
        self.bindings.get(&node).copied()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.bindings.contains_key(&node)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// `(node, state)` pairs in ascending node order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bindings.iter().map(|(&n, &s)| (n, s))
    }
}

impl FromIterator<(usize, usize)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        Self {
            bindings: iter.into_iter().collect(),
        }
    }
}

/// Validated graph structure without parameters.
///
/// Each node's parents are ordered as their arcs appear in the edge list;
/// [`crate::learning`] lays out learned CPTs in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    nodes: Vec<StateSpace>,
    edges: Vec<Edge>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl Skeleton {
    pub fn new(nodes: Vec<StateSpace>, edges: Vec<Edge>) -> Result<Self, NetworkError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            node.validate()?;
            if index.insert(node.name.clone(), i).is_some() {
                return Err(NetworkError::DuplicateNode(node.name.clone()));
            }
        }

        let mut parents = vec![Vec::new(); nodes.len()];
        let mut children = vec![Vec::new(); nodes.len()];
        let mut seen = HashSet::new();
        for edge in &edges {
            let from = *index
                .get(&edge.from)
                .ok_or_else(|| NetworkError::UnknownNode(edge.from.clone()))?;
            let to = *index
                .get(&edge.to)
                .ok_or_else(|| NetworkError::UnknownNode(edge.to.clone()))?;
            if !seen.insert((from, to)) {
                return Err(NetworkError::DuplicateEdge {
                    from: edge.from.clone(),
                    to: edge.to.clone(),
                });
            }
            parents[to].push(from);
            children[from].push(to);
        }

        let topo = topological_order(&parents, &children)
            .map_err(|stuck| NetworkError::CycleDetected(stuck.into_iter().map(|i| nodes[i].name.clone()).collect()))?;

        Ok(Self {
            nodes,
            edges,
            index,
            parents,
            children,
            topo,
        })
    }

    pub fn nodes(&self) -> &[StateSpace] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_index(&self, name: &str) -> Result<usize, NetworkError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| NetworkError::UnknownNode(name.to_string()))
    }

    pub fn node(&self, index: usize) -> &StateSpace {
        &self.nodes[index]
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    /// Number of parent configurations of `node`.
    pub fn row_count(&self, node: usize) -> usize {
        self.parents[node].iter().map(|&p| self.nodes[p].len()).product()
    }

    /// Attach CPTs and validate them against the graph.
    pub fn with_cpts(self, cpts: Vec<Cpt>) -> Result<Network, NetworkError> {
        Network::from_parts(self, cpts)
    }
}

/// Kahn's algorithm, always releasing the lowest-index ready node first so the
/// order is a deterministic function of declaration order. On failure returns
/// the nodes left on a cycle (or downstream of one).
fn topological_order(parents: &[Vec<usize>], children: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<usize>> = indegree
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(i, _)| Reverse(i))
        .collect();
    let mut order = Vec::with_capacity(parents.len());
    while let Some(Reverse(n)) = ready.pop() {
        order.push(n);
        for &c in &children[n] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() == parents.len() {
        Ok(order)
    } else {
        Err((0..parents.len()).filter(|&i| indegree[i] > 0).collect())
    }
}

/// Immutable discrete Bayesian network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDoc", into = "NetworkDoc")]
pub struct Network {
    skeleton: Skeleton,
    /// One CPT per node, indexed like `skeleton.nodes`.
    cpts: Vec<Cpt>,
    /// CPT parent order as node indices; may differ from the skeleton's order.
    cpt_parents: Vec<Vec<usize>>,
    strides: Vec<Vec<usize>>,
}

/// Plain serialized form of a [`Network`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub nodes: Vec<StateSpace>,
    pub edges: Vec<Edge>,
    pub cpts: Vec<Cpt>,
}

impl TryFrom<NetworkDoc> for Network {
    type Error = NetworkError;

    fn try_from(doc: NetworkDoc) -> Result<Self, Self::Error> {
        build_network(doc.nodes, doc.edges, doc.cpts)
    }
}

impl From<Network> for NetworkDoc {
    fn from(net: Network) -> Self {
        NetworkDoc {
            nodes: net.skeleton.nodes,
            edges: net.skeleton.edges,
            cpts: net.cpts,
        }
    }
}

/// Validate a graph and its CPTs into a [`Network`].
pub fn build_network(nodes: Vec<StateSpace>, edges: Vec<Edge>, cpts: Vec<Cpt>) -> Result<Network, NetworkError> {
    Skeleton::new(nodes, edges)?.with_cpts(cpts)
}

impl Network {
    fn from_parts(skeleton: Skeleton, cpts: Vec<Cpt>) -> Result<Self, NetworkError> {
        let n = skeleton.node_count();
        let mut slots: Vec<Option<Cpt>> = vec![None; n];
        for cpt in cpts {
            let i = skeleton
                .index
                .get(&cpt.child)
                .copied()
                .ok_or_else(|| NetworkError::UnknownNode(cpt.child.clone()))?;
            if slots[i].is_some() {
                return Err(mismatch(&cpt.child, "more than one CPT supplied"));
            }
            slots[i] = Some(cpt);
        }

        let mut cpts = Vec::with_capacity(n);
        let mut cpt_parents = Vec::with_capacity(n);
        let mut strides = Vec::with_capacity(n);
        for (i, slot) in slots.into_iter().enumerate() {
            let name = skeleton.nodes[i].name();
            let cpt = slot.ok_or_else(|| mismatch(name, "no CPT supplied"))?;
            let parents = resolve_cpt_parents(&skeleton, i, &cpt)?;
            let cards: Vec<usize> = parents.iter().map(|&p| skeleton.nodes[p].len()).collect();
            validate_rows(&cpt, skeleton.nodes[i].len(), cards.iter().product())?;
            strides.push(mixed_radix_strides(&cards));
            cpt_parents.push(parents);
            cpts.push(cpt);
        }

        Ok(Self {
            skeleton,
            cpts,
            cpt_parents,
            strides,
        })
    }

    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    pub fn nodes(&self) -> &[StateSpace] {
        self.skeleton.nodes()
    }

    pub fn edges(&self) -> &[Edge] {
        self.skeleton.edges()
    }

    pub fn node_count(&self) -> usize {
        self.skeleton.node_count()
    }

    pub fn node(&self, index: usize) -> &StateSpace {
        self.skeleton.node(index)
    }

    pub fn node_index(&self, name: &str) -> Result<usize, NetworkError> {
        self.skeleton.node_index(name)
    }

    pub fn topo_order(&self) -> &[usize] {
        self.skeleton.topo_order()
    }

    pub fn children(&self, node: usize) -> &[usize] {
        self.skeleton.children(node)
    }

    pub fn cpt(&self, node: usize) -> &Cpt {
        &self.cpts[node]
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    /// Parents of `node` in the CPT's declared order.
    pub fn parents(&self, node: usize) -> &[usize] {
        &self.cpt_parents[node]
    }

    /// Resolve a state name of a node to its index.
    pub fn state_index(&self, node: usize, state: &str) -> Result<usize, NetworkError> {
        let space = self.node(node);
        space.index_of(state).ok_or_else(|| NetworkError::UnknownState {
            node: space.name().to_string(),
            state: state.to_string(),
        })
    }

    /// Build a validated assignment from `(node, state)` name pairs.
    pub fn assignment<N: AsRef<str>, S: AsRef<str>>(
        &self,
        pairs: impl IntoIterator<Item = (N, S)>,
    ) -> Result<Assignment, NetworkError> {
        let mut out = Assignment::new();
        for (node, state) in pairs {
            let n = self.node_index(node.as_ref())?;
            out.bind(n, self.state_index(n, state.as_ref())?);
        }
        Ok(out)
    }

    /// Check that every binding names an existing node and an in-range state.
    pub fn check_assignment(&self, assignment: &Assignment) -> Result<(), NetworkError> {
        for (node, state) in assignment.iter() {
            if node >= self.node_count() {
                return Err(NetworkError::UnknownNode(format!("#{node}")));
            }
            if state >= self.node(node).len() {
                return Err(NetworkError::StateOutOfRange {
                    node: self.node(node).name().to_string(),
                    index: state,
                });
            }
        }
        Ok(())
    }

    /// Mixed-radix row index of `child`'s CPT under `config`.
    pub fn row_index(&self, child: usize, config: &Assignment) -> Result<usize, NetworkError> {
        if child >= self.node_count() {
            return Err(NetworkError::UnknownNode(format!("#{child}")));
        }
        let mut idx = 0;
        for (&p, &stride) in self.cpt_parents[child].iter().zip(&self.strides[child]) {
            let s = config.get(p).ok_or_else(|| NetworkError::IncompleteParentConfig {
                node: self.node(child).name().to_string(),
                missing: self.node(p).name().to_string(),
            })?;
            if s >= self.node(p).len() {
                return Err(NetworkError::StateOutOfRange {
                    node: self.node(p).name().to_string(),
                    index: s,
                });
            }
            idx += s * stride;
        }
        Ok(idx)
    }

    /// Stored CPT row of `child` for the parent states bound in `config`.
    /// Bindings for non-parents are ignored.
    pub fn cpt_row(&self, child: usize, config: &Assignment) -> Result<&[f64], NetworkError> {
        let idx = self.row_index(child, config)?;
        Ok(&self.cpts[child].rows[idx])
    }

    /// Row index from a dense state vector covering every node.
    pub(crate) fn row_index_dense(&self, child: usize, states: &[usize]) -> usize {
        self.cpt_parents[child]
            .iter()
            .zip(&self.strides[child])
            .map(|(&p, &stride)| states[p] * stride)
            .sum()
    }

    /// `P(node = states[node] | parents)` from a dense state vector.
    pub(crate) fn factor_dense(&self, node: usize, states: &[usize]) -> f64 {
        self.cpts[node].rows[self.row_index_dense(node, states)][states[node]]
    }

    /// Probability of a complete assignment: the product of one CPT entry
    /// per node.
    pub fn joint_probability(&self, full: &Assignment) -> Result<f64, NetworkError> {
        self.check_assignment(full)?;
        let mut states = Vec::with_capacity(self.node_count());
        for i in 0..self.node_count() {
            states.push(
                full.get(i)
                    .ok_or_else(|| NetworkError::IncompleteAssignment(self.node(i).name().to_string()))?,
            );
        }
        Ok(self
            .topo_order()
            .iter()
            .map(|&n| self.factor_dense(n, &states))
            .product())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn mismatch(node: &str, reason: impl Into<String>) -> NetworkError {
    NetworkError::CptMismatch {
        node: node.to_string(),
        reason: reason.into(),
    }
}

fn resolve_cpt_parents(skeleton: &Skeleton, node: usize, cpt: &Cpt) -> Result<Vec<usize>, NetworkError> {
    let name = skeleton.nodes[node].name();
    let mut resolved = Vec::with_capacity(cpt.parents.len());
    for p in &cpt.parents {
        let idx = skeleton
            .index
            .get(p)
            .copied()
            .ok_or_else(|| mismatch(name, format!("parent `{p}` is not a node")))?;
        if resolved.contains(&idx) {
            return Err(mismatch(name, format!("parent `{p}` listed twice")));
        }
        resolved.push(idx);
    }
    let mut declared = resolved.clone();
    declared.sort_unstable();
    let mut graph = skeleton.parents(node).to_vec();
    graph.sort_unstable();
    if declared != graph {
        let names = |v: &[usize]| {
            v.iter()
                .map(|&i| skeleton.nodes[i].name().to_string())
                .collect::<Vec<_>>()
        };
        return Err(mismatch(
            name,
            format!(
                "parents {:?} differ from graph in-neighbors {:?}",
                names(&declared),
                names(&graph)
            ),
        ));
    }
    Ok(resolved)
}

fn validate_rows(cpt: &Cpt, child_card: usize, row_count: usize) -> Result<(), NetworkError> {
    let name = &cpt.child;
    if cpt.rows.len() != row_count {
        return Err(mismatch(
            name,
            format!("expected {row_count} rows, found {}", cpt.rows.len()),
        ));
    }
    for (k, row) in cpt.rows.iter().enumerate() {
        if row.len() != child_card {
            return Err(mismatch(
                name,
                format!("row {k} has {} entries, expected {child_card}", row.len()),
            ));
        }
        if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(mismatch(name, format!("row {k} has a negative or non-finite entry")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(mismatch(name, format!("row {k} sums to {sum}")));
        }
    }
    if let Some(counts) = &cpt.counts {
        if counts.len() != row_count || counts.iter().any(|r| r.len() != child_card) {
            return Err(mismatch(name, "count table shape differs from rows"));
        }
    }
    if let Some(alpha) = cpt.alpha {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(mismatch(name, format!("smoothing alpha {alpha} is not positive")));
        }
    }
    Ok(())
}

/// Strides for a mixed-radix number whose first digit is most significant.
pub(crate) fn mixed_radix_strides(cards: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; cards.len()];
    for k in (0..cards.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * cards[k + 1];
    }
    strides
}
