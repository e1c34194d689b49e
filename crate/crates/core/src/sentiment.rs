//! Canonical three-class sentiment labels and source-label remapping.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sentiment class in canonical order: negative, neutral, positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Negative,
    Neutral,
    Positive,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Negative, Sentiment::Neutral, Sentiment::Positive];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
            Sentiment::Positive => "positive",
        }
    }

    /// State names for a sentiment-valued network node.
    pub fn state_names() -> [&'static str; 3] {
        [Self::Negative.as_str(), Self::Neutral.as_str(), Self::Positive.as_str()]
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown sentiment label `{0}`")]
pub struct UnknownLabel(pub String);

impl FromStr for Sentiment {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "negative" => Ok(Sentiment::Negative),
            "neutral" => Ok(Sentiment::Neutral),
            "positive" => Ok(Sentiment::Positive),
            other => Err(UnknownLabel(other.to_string())),
        }
    }
}

/// Index of the first maximal entry. Ties go to the earliest position, which
/// for sentiment vectors is the canonical order.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Maps source-dataset label strings onto canonical sentiment.
///
/// Lookup is case-insensitive and ignores surrounding whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    mapping: BTreeMap<String, Sentiment>,
}

impl LabelMap {
    pub fn new() -> Self {
        Self {
            mapping: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, source: &str, target: Sentiment) -> &mut Self {
        self.mapping.insert(normalize(source), target);
        self
    }

    pub fn get(&self, source: &str) -> Option<Sentiment> {
        self.mapping.get(&normalize(source)).copied()
    }

    pub fn map(&self, source: &str) -> Result<Sentiment, UnknownLabel> {
        self.get(source).ok_or_else(|| UnknownLabel(source.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Sentiment)> {
        self.mapping.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

impl Default for LabelMap {
    /// Canonical names, the integer codes 0/1/2, and the bearish/bullish
    /// vocabulary of financial tweet corpora.
    fn default() -> Self {
        let mut map = Self::new();
        for s in Sentiment::ALL {
            map.insert(s.as_str(), s);
            map.insert(&s.index().to_string(), s);
        }
        map.insert("bearish", Sentiment::Negative)
            .insert("bullish", Sentiment::Positive);
        map
    }
}

fn normalize(label: &str) -> String {
    label.trim().to_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order() {
        assert_eq!(Sentiment::Negative.index(), 0);
        assert_eq!(Sentiment::Neutral.index(), 1);
        assert_eq!(Sentiment::Positive.index(), 2);
        assert!(Sentiment::from_index(3).is_none());
    }

    #[test]
    fn default_map_covers_tweet_vocabulary() {
        let map = LabelMap::default();
        assert_eq!(map.get("bearish"), Some(Sentiment::Negative));
        assert_eq!(map.get("Bullish"), Some(Sentiment::Positive));
        assert_eq!(map.get(" neutral "), Some(Sentiment::Neutral));
        assert_eq!(map.get("2"), Some(Sentiment::Positive));
        assert!(map.map("mixed").is_err());
    }

    #[test]
    fn argmax_first_wins() {
        assert_eq!(argmax(&[0.5, 0.5, 0.0]), 0);
        assert_eq!(argmax(&[1.0 / 3.0; 3]), 0);
        assert_eq!(argmax(&[0.3436, 0.6513, 0.0051]), 1);
        assert_eq!(argmax(&[0.1, 0.2, 0.7]), 2);
    }
}
