//! Fixed-evidence scenario queries on a fitted fusion network.

use serde::{Deserialize, Serialize};

use crate::inference::posterior;
use crate::network::Assignment;
use crate::pipeline::{FusionNodes, ModelFile, PipelineError};
use crate::sentiment::Sentiment;
use crate::table::{fmt4, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub corpus: String,
    /// `(model, label)` evidence applied alongside the corpus.
    pub evidence: Vec<(String, Sentiment)>,
    pub posterior: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub rows: Vec<ScenarioRow>,
}

impl Scenario {
    pub fn table(&self) -> Table {
        let mut t = Table::new(
            format!("Scenario: {}", self.name),
            ["Corpus", "Negative (%)", "Neutral (%)", "Positive (%)"],
        );
        for r in &self.rows {
            t.push(std::iter::once(r.corpus.clone()).chain(r.posterior.iter().map(|p| format!("{:.2}", 100.0 * p))));
        }
        t
    }
}

/// Posterior of the sentiment node for every corpus under the same model labels.
pub fn corpus_sweep(model: &ModelFile, name: &str, labels: &[Sentiment]) -> Result<Scenario, PipelineError> {
    let net = &model.network;
    let models = &model.config.models;
    let nodes = FusionNodes::resolve(net, models)?;
    let mut rows = Vec::new();
    for (c, corpus) in net.node(nodes.corpus).states().iter().enumerate() {
        let mut evidence = Assignment::new().with(nodes.corpus, c);
        for (&node, &label) in nodes.models.iter().zip(labels) {
            evidence.bind(node, net.state_index(node, label.as_str())?);
        }
        let post = posterior(net, nodes.sentiment, &evidence)?;
        rows.push(ScenarioRow {
            corpus: corpus.clone(),
            evidence: models.iter().cloned().zip(labels.iter().copied()).collect(),
            posterior: post.distribution.as_slice().try_into().expect("three states"),
        });
    }
    Ok(Scenario {
        name: name.to_string(),
        rows,
    })
}

/// The two standard sweeps: every model negative, and models cycling through
/// negative, neutral, positive in configured order.
pub fn standard_scenarios(model: &ModelFile) -> Result<Vec<Scenario>, PipelineError> {
    let k = model.config.models.len();
    let all_negative = vec![Sentiment::Negative; k];
    let cycling: Vec<Sentiment> = (0..k).map(|i| Sentiment::ALL[i % 3]).collect();
    let describe = model
        .config
        .models
        .iter()
        .zip(&cycling)
        .map(|(m, l)| format!("{m}={l}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(vec![
        corpus_sweep(model, "all models negative", &all_negative)?,
        corpus_sweep(model, &describe, &cycling)?,
    ])
}

/// Two-column table of a posterior over sentiment states.
pub fn posterior_table(title: &str, distribution: &[f64], states: &[String]) -> Table {
    let mut t = Table::new(title, ["State", "Probability"]);
    for (s, p) in states.iter().zip(distribution) {
        t.push([s.clone(), fmt4(*p)]);
    }
    t
}
