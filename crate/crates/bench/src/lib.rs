//! Shared fixtures for the benchmarks.

use bnlf::synthetic::SyntheticSpec;
use bnlf::{fit, BnlfConfig, ModelFile, PredictionRecord};

/// Synthetic records at roughly the scale of the three public corpora combined.
pub fn full_scale_records() -> Vec<PredictionRecord> {
    SyntheticSpec::home_corpus(5_136, [0.9; 3], 0.55, 0).generate()
}

/// Fitted default fusion model and the records it was fitted from.
pub fn fitted(records_per_corpus: usize) -> (ModelFile, Vec<PredictionRecord>) {
    let records = SyntheticSpec::home_corpus(records_per_corpus, [0.9; 3], 0.55, 0).generate();
    let model = fit(&BnlfConfig::default(), &records)
        .expect("synthetic data fits")
        .model;
    (model, records)
}
