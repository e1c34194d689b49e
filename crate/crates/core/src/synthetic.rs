//! Seeded synthetic prediction corpora for tests and benchmarks.
//!
//! Each record draws a corpus, then a gold label from that corpus's class
//! prior, then one prediction per model: correct with the model's accuracy on
//! that corpus, otherwise uniformly one of the two wrong classes. Every
//! prediction carries a probability vector whose argmax is the predicted label.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{ModelPrediction, PredictionRecord, KNOWN_CORPORA};
use crate::pipeline::DEFAULT_MODELS;
use crate::sentiment::Sentiment;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub tag: String,
    pub records: usize,
    /// Gold class proportions in canonical order.
    pub class_prior: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    /// Probability of a correct label, one entry per corpus.
    pub accuracy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub corpora: Vec<CorpusSpec>,
    pub models: Vec<ModelSpec>,
    pub seed: u64,
}

/// Class proportions of the three public financial corpora.
pub const CORPUS_PRIORS: [[f64; 3]; 3] = [
    [0.1338, 0.6144, 0.2518],
    [0.1499, 0.6491, 0.2010],
    [0.5903, 0.0973, 0.3124],
];

impl SyntheticSpec {
    /// Three corpora and three models; model `i` is `home[i]`-accurate on
    /// corpus `i` and `away`-accurate on the other two.
    pub fn home_corpus(records_per_corpus: usize, home: [f64; 3], away: f64, seed: u64) -> Self {
        let corpora = KNOWN_CORPORA
            .iter()
            .zip(CORPUS_PRIORS)
            .map(|(tag, prior)| CorpusSpec {
                tag: tag.to_string(),
                records: records_per_corpus,
                class_prior: prior,
            })
            .collect();
        let models = DEFAULT_MODELS
            .iter()
            .enumerate()
            .map(|(i, name)| ModelSpec {
                name: name.to_string(),
                accuracy: (0..3).map(|c| if c == i { home[i] } else { away }).collect(),
            })
            .collect();
        Self { corpora, models, seed }
    }

    pub fn model_names(&self) -> Vec<String> {
        self.models.iter().map(|m| m.name.clone()).collect()
    }

    pub fn generate(&self) -> Vec<PredictionRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.corpora.iter().map(|c| c.records).sum());
        for (ci, corpus) in self.corpora.iter().enumerate() {
            for i in 0..corpus.records {
                let gold = sample_class(&mut rng, &corpus.class_prior);
                let preds = self
                    .models
                    .iter()
                    .map(|m| {
                        let label = if rng.random::<f64>() < m.accuracy[ci] {
                            gold
                        } else {
                            let offset = 1 + rng.random_range(0..2);
                            Sentiment::ALL[(gold.index() + offset) % 3]
                        };
                        let probs = probability_vector(&mut rng, label);
                        (
                            m.name.clone(),
                            ModelPrediction {
                                label,
                                probs: Some(probs),
                            },
                        )
                    })
                    .collect();
                out.push(PredictionRecord {
                    id: format!("{}-{i:06}", corpus.tag),
                    corpus: corpus.tag.clone(),
                    text: None,
                    gold,
                    preds,
                });
            }
        }
        out
    }
}

fn sample_class<R: Rng>(rng: &mut R, prior: &[f64; 3]) -> Sentiment {
    let total: f64 = prior.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &p) in prior.iter().enumerate() {
        if u < p {
            return Sentiment::ALL[i];
        }
        u -= p;
    }
    Sentiment::Positive
}

/// Normalized vector with more than half its mass on `label`.
fn probability_vector<R: Rng>(rng: &mut R, label: Sentiment) -> [f64; 3] {
    let top = rng.random_range(0.55..0.95);
    let split = rng.random::<f64>();
    let rest = 1.0 - top;
    let mut v = [0.0; 3];
    v[label.index()] = top;
    v[(label.index() + 1) % 3] = rest * split;
    v[(label.index() + 2) % 3] = rest - rest * split;
    v
}
