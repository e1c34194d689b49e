//! Ensemble baselines: majority voting with a fallback model, and
//! probability averaging.

use thiserror::Error;

use crate::sentiment::{argmax, Sentiment};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnsembleError {
    #[error("majority voting needs at least two models, got {0}")]
    TooFewModels(usize),
    #[error("fallback model `{0}` has no prediction")]
    MissingFallbackPrediction(String),
    #[error("no probability vectors to average")]
    MissingProbabilities,
}

/// Label held by at least two models; when no label has a strict plurality of
/// two or more votes, the fallback model's label.
pub fn majority_vote(preds: &[(&str, Sentiment)], fallback: &str) -> Result<Sentiment, EnsembleError> {
    if preds.len() < 2 {
        return Err(EnsembleError::TooFewModels(preds.len()));
    }
    let fallback_label = preds
        .iter()
        .find(|(m, _)| *m == fallback)
        .map(|&(_, l)| l)
        .ok_or_else(|| EnsembleError::MissingFallbackPrediction(fallback.to_string()))?;

    let mut votes = [0usize; 3];
    for &(_, label) in preds {
        votes[label.index()] += 1;
    }
    let top = *votes.iter().max().expect("three classes");
    let winners: Vec<usize> = (0..3).filter(|&i| votes[i] == top).collect();
    if top >= 2 && winners.len() == 1 {
        Ok(Sentiment::ALL[winners[0]])
    } else {
        Ok(fallback_label)
    }
}

/// Class-wise mean of the supplied vectors and its argmax, first class on ties.
pub fn probability_average(probs: &[[f64; 3]]) -> Result<([f64; 3], Sentiment), EnsembleError> {
    if probs.is_empty() {
        return Err(EnsembleError::MissingProbabilities);
    }
    let n = probs.len() as f64;
    let mut mean = [0.0; 3];
    for p in probs {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    Ok((mean, Sentiment::ALL[argmax(&mean)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sentiment::{Negative as NEG, Neutral as NEU, Positive as POS};

    fn vote(labels: [Sentiment; 3]) -> Sentiment {
        let preds = [("finbert", labels[0]), ("roberta", labels[1]), ("bertweet", labels[2])];
        majority_vote(&preds, "finbert").unwrap()
    }

    #[test]
    fn two_of_three() {
        assert_eq!(vote([NEG, NEG, POS]), NEG);
        assert_eq!(vote([POS, NEU, NEU]), NEU);
        assert_eq!(vote([POS, POS, POS]), POS);
    }

    #[test]
    fn disagreement_falls_back() {
        assert_eq!(vote([NEG, NEU, POS]), NEG);
        assert_eq!(vote([POS, NEU, NEG]), POS);
    }

    #[test]
    fn vote_errors() {
        assert_eq!(
            majority_vote(&[("a", NEG)], "a").unwrap_err(),
            EnsembleError::TooFewModels(1)
        );
        assert!(matches!(
            majority_vote(&[("a", NEG), ("b", NEG)], "c"),
            Err(EnsembleError::MissingFallbackPrediction(_))
        ));
    }

    #[test]
    fn four_models_tied_pairs_fall_back() {
        let preds = [("a", NEG), ("b", NEG), ("c", POS), ("d", POS)];
        assert_eq!(majority_vote(&preds, "c").unwrap(), POS);
    }

    #[test]
    fn averaging() {
        let (mean, label) = probability_average(&[[0.6, 0.3, 0.1], [0.2, 0.5, 0.3], [0.1, 0.6, 0.3]]).unwrap();
        for (m, w) in mean.iter().zip([0.3, 1.4 / 3.0, 0.7 / 3.0]) {
            assert!((m - w).abs() < 1e-15);
        }
        assert_eq!(label, NEU);
        assert_eq!(probability_average(&[[0.0, 0.0, 1.0]; 3]).unwrap().1, POS);
        assert_eq!(probability_average(&[[0.5, 0.5, 0.0]]).unwrap().1, NEG);
        assert_eq!(
            probability_average(&[]).unwrap_err(),
            EnsembleError::MissingProbabilities
        );
    }
}
