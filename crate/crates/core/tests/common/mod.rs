//! Shared builders for integration tests.
#![allow(dead_code)]

use bnlf::data::ModelPrediction;
use bnlf::network::{build_network, Cpt, Edge, Network, StateSpace};
use bnlf::{PredictionRecord, Sentiment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random DAG over `n0..n{k}` (edges only from lower to higher index) with
/// random normalized CPTs, some entries exactly zero.
pub fn random_network(seed: u64, max_nodes: usize, max_states: usize) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_nodes);
    let cards: Vec<usize> = (0..n).map(|_| rng.random_range(2..=max_states)).collect();
    let mut parents = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for (child, ps) in parents.iter_mut().enumerate().skip(1) {
        for p in 0..child {
            if rng.random::<f64>() < 0.45 && ps.len() < 3 {
                ps.push(p);
                edges.push(Edge::new(format!("n{p}"), format!("n{child}")));
            }
        }
    }
    let nodes = (0..n)
        .map(|i| StateSpace::new(format!("n{i}"), (0..cards[i]).map(|s| format!("s{s}"))).unwrap())
        .collect();
    let cpts = (0..n)
        .map(|i| {
            let configs: usize = parents[i].iter().map(|&p| cards[p]).product();
            let rows = (0..configs).map(|_| random_row(&mut rng, cards[i])).collect();
            Cpt::new(format!("n{i}"), parents[i].iter().map(|p| format!("n{p}")), rows)
        })
        .collect();
    build_network(nodes, edges, cpts).unwrap()
}

pub fn random_row<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..k)
        .map(|_| {
            if rng.random::<f64>() < 0.1 {
                0.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    if row.iter().all(|&x| x == 0.0) {
        row[0] = 1.0;
    }
    let s: f64 = row.iter().sum();
    row.iter().map(|x| x / s).collect()
}

/// Every full assignment of the network as dense state vectors.
pub fn all_states(net: &Network) -> Vec<Vec<usize>> {
    let cards: Vec<usize> = net.nodes().iter().map(|n| n.len()).collect();
    let total: usize = cards.iter().product();
    (0..total)
        .map(|mut k| {
            let mut s = vec![0; cards.len()];
            for i in (0..cards.len()).rev() {
                s[i] = k % cards[i];
                k /= cards[i];
            }
            s
        })
        .collect()
}

pub fn models() -> Vec<String> {
    ["finbert", "roberta", "bertweet"].map(String::from).to_vec()
}

pub fn record(id: impl Into<String>, corpus: &str, labels: &[Option<Sentiment>], gold: Sentiment) -> PredictionRecord {
    PredictionRecord {
        id: id.into(),
        corpus: corpus.into(),
        text: None,
        gold,
        preds: models()
            .into_iter()
            .zip(labels)
            .filter_map(|(m, l)| l.map(|label| (m, ModelPrediction { label, probs: None })))
            .collect(),
    }
}

pub fn sentiment(i: usize) -> Sentiment {
    Sentiment::ALL[i % 3]
}
