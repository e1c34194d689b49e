//! Exact posterior inference by enumeration.
//!
//! Only the ancestral closure of the query and evidence nodes is enumerated;
//! every other node is barren and sums out to one. When the evidence binds all
//! parents of a query node with no observed descendants, the posterior is the
//! stored CPT row itself.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Assignment, Network, NetworkError};
use crate::sentiment::argmax;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("evidence has zero probability under the network")]
    InconsistentEvidence,
    #[error("query node `{0}` is bound in the evidence")]
    QueryBoundInEvidence(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Normalized distribution over a query node's states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub node: usize,
    pub distribution: Vec<f64>,
    pub evidence: Assignment,
}

impl Posterior {
    /// Index of the most probable state, first in canonical order on ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.distribution)
    }
}

/// `P(query | evidence)`.
pub fn posterior(net: &Network, query: usize, evidence: &Assignment) -> Result<Posterior, InferenceError> {
    if query >= net.node_count() {
        return Err(NetworkError::UnknownNode(format!("#{query}")).into());
    }
    net.check_assignment(evidence)?;
    if evidence.contains(query) {
        return Err(InferenceError::QueryBoundInEvidence(net.node(query).name().to_string()));
    }

    let relevant = ancestral_closure(net, std::iter::once(query).chain(evidence.iter().map(|(n, _)| n)));
    let observed_descendant = net.children(query).iter().any(|&c| relevant[c]);
    let parents_bound = net.parents(query).iter().all(|&p| evidence.contains(p));
    if parents_bound && !observed_descendant {
        let evidence_nodes = ancestral_closure(net, evidence.iter().map(|(n, _)| n));
        let p_evidence = enumerate_marginal(net, &[], evidence, &evidence_nodes)[0];
        if p_evidence.is_nan() || p_evidence <= 0.0 {
            return Err(InferenceError::InconsistentEvidence);
        }
        let distribution = net.cpt_row(query, evidence)?.to_vec();
        return Ok(Posterior {
            node: query,
            distribution,
            evidence: evidence.clone(),
        });
    }

    let targets = [query];
    let table = enumerate_marginal(net, &targets, evidence, &relevant);
    let distribution = normalize(table).ok_or(InferenceError::InconsistentEvidence)?;
    Ok(Posterior {
        node: query,
        distribution,
        evidence: evidence.clone(),
    })
}

/// Argmax state of `P(query | evidence)`.
pub fn predict_label(net: &Network, query: usize, evidence: &Assignment) -> Result<usize, InferenceError> {
    Ok(posterior(net, query, evidence)?.argmax())
}

/// Joint distribution `P(nodes | evidence)` over the listed nodes, flattened
/// in mixed-radix order (first node most significant).
pub fn joint_posterior(net: &Network, nodes: &[usize], evidence: &Assignment) -> Result<Vec<f64>, InferenceError> {
    net.check_assignment(evidence)?;
    for &n in nodes {
        if n >= net.node_count() {
            return Err(NetworkError::UnknownNode(format!("#{n}")).into());
        }
        if evidence.contains(n) {
            return Err(InferenceError::QueryBoundInEvidence(net.node(n).name().to_string()));
        }
    }
    let relevant = ancestral_closure(net, nodes.iter().copied().chain(evidence.iter().map(|(n, _)| n)));
    normalize(enumerate_marginal(net, nodes, evidence, &relevant)).ok_or(InferenceError::InconsistentEvidence)
}

/// Marks the given nodes and all their ancestors.
fn ancestral_closure(net: &Network, seeds: impl Iterator<Item = usize>) -> Vec<bool> {
    let mut mark = vec![false; net.node_count()];
    let mut stack: Vec<usize> = seeds.collect();
    while let Some(n) = stack.pop() {
        if !mark[n] {
            mark[n] = true;
            stack.extend(net.parents(n).iter().copied().filter(|&p| !mark[p]));
        }
    }
    mark
}

/// Unnormalized `P(targets, evidence)` summed over every other relevant node.
fn enumerate_marginal(net: &Network, targets: &[usize], evidence: &Assignment, relevant: &[bool]) -> Vec<f64> {
    let mut states = vec![0usize; net.node_count()];
    for (n, s) in evidence.iter() {
        states[n] = s;
    }
    let hidden: Vec<usize> = net
        .topo_order()
        .iter()
        .copied()
        .filter(|&n| relevant[n] && !evidence.contains(n) && !targets.contains(&n))
        .collect();
    let factors: Vec<usize> = net.topo_order().iter().copied().filter(|&n| relevant[n]).collect();

    let cards: Vec<usize> = targets.iter().map(|&t| net.node(t).len()).collect();
    let mut out = vec![0.0; cards.iter().product()];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut rem = k;
        for (i, &t) in targets.iter().enumerate().rev() {
            states[t] = rem % cards[i];
            rem /= cards[i];
        }
        *slot = sum_hidden(net, &hidden, &factors, &mut states);
    }
    out
}

fn sum_hidden(net: &Network, hidden: &[usize], factors: &[usize], states: &mut [usize]) -> f64 {
    for &h in hidden {
        states[h] = 0;
    }
    let mut total = 0.0;
    loop {
        total += factors.iter().map(|&n| net.factor_dense(n, states)).product::<f64>();
        // odometer over hidden states, last hidden node fastest
        let mut pos = hidden.len();
        loop {
            if pos == 0 {
                return total;
            }
            pos -= 1;
            let h = hidden[pos];
            states[h] += 1;
            if states[h] < net.node(h).len() {
                break;
            }
            states[h] = 0;
        }
    }
}

fn normalize(mut values: Vec<f64>) -> Option<Vec<f64>> {
    let total: f64 = values.iter().sum();
    if total.is_nan() || total <= 0.0 || !total.is_finite() {
        return None;
    }
    for v in &mut values {
        *v /= total;
    }
    Some(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_network, Cpt, Edge, StateSpace};

    fn binary(name: &str) -> StateSpace {
        StateSpace::new(name, ["0", "1"]).unwrap()
    }

    fn chain() -> Network {
        build_network(
            vec![binary("A"), binary("B")],
            vec![Edge::new("A", "B")],
            vec![
                Cpt::prior("A", vec![0.2, 0.8]),
                Cpt::new("B", ["A"], vec![vec![0.9, 0.1], vec![0.3, 0.7]]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn prior_recovery() {
        let p = posterior(&chain(), 0, &Assignment::new()).unwrap();
        assert_eq!(p.distribution, vec![0.2, 0.8]);
    }

    #[test]
    fn diagnostic_direction_by_hand() {
        // P(A=0 | B=0) = 0.2*0.9 / (0.2*0.9 + 0.8*0.3)
        let net = chain();
        let ev = net.assignment([("B", "0")]).unwrap();
        let p = posterior(&net, 0, &ev).unwrap();
        let expected = 0.18 / (0.18 + 0.24);
        assert!((p.distribution[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn full_parent_evidence_returns_row_bitwise() {
        let net = chain();
        let ev = net.assignment([("A", "1")]).unwrap();
        let p = posterior(&net, 1, &ev).unwrap();
        assert_eq!(p.distribution.as_slice(), net.cpt_row(1, &ev).unwrap());
    }

    #[test]
    fn query_in_evidence() {
        let net = chain();
        let ev = net.assignment([("A", "1")]).unwrap();
        assert!(matches!(
            posterior(&net, 0, &ev),
            Err(InferenceError::QueryBoundInEvidence(_))
        ));
    }

    #[test]
    fn zero_probability_evidence() {
        let net = build_network(
            vec![binary("A"), binary("B"), binary("C")],
            vec![Edge::new("A", "B"), Edge::new("B", "C")],
            vec![
                Cpt::prior("A", vec![1.0, 0.0]),
                Cpt::new("B", ["A"], vec![vec![1.0, 0.0], vec![0.5, 0.5]]),
                Cpt::new("C", ["B"], vec![vec![0.5, 0.5], vec![0.5, 0.5]]),
            ],
        )
        .unwrap();
        let ev = net.assignment([("B", "1")]).unwrap();
        assert_eq!(
            posterior(&net, 2, &ev).unwrap_err(),
            InferenceError::InconsistentEvidence
        );
        assert_eq!(
            posterior(&net, 0, &ev).unwrap_err(),
            InferenceError::InconsistentEvidence
        );
    }

    #[test]
    fn barren_descendants_are_ignored() {
        let net = chain();
        // B is unobserved and a sink, so P(A) is untouched.
        let p = posterior(&net, 0, &Assignment::new()).unwrap();
        assert_eq!(p.distribution, vec![0.2, 0.8]);
    }

    #[test]
    fn joint_posterior_sums_to_one() {
        let net = chain();
        let j = joint_posterior(&net, &[0, 1], &Assignment::new()).unwrap();
        assert_eq!(j.len(), 4);
        assert!((j.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((j[0] - 0.18).abs() < 1e-15);
    }

    #[test]
    fn tie_breaks_to_first_state() {
        let net = build_network(
            vec![StateSpace::new("S", ["neg", "neu", "pos"]).unwrap()],
            vec![],
            vec![Cpt::prior("S", vec![0.5, 0.5, 0.0])],
        )
        .unwrap();
        assert_eq!(predict_label(&net, 0, &Assignment::new()).unwrap(), 0);
    }
}
