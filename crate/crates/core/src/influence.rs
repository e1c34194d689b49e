//! Strength of influence along network arcs.
//!
//! For an arc `parent -> child`, the child's CPT rows are compared across every
//! pair of parent states while the child's other parents are held at a fixed
//! configuration. The pairwise distances are then aggregated over all state
//! pairs and all other-parent configurations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::{joint_posterior, InferenceError};
use crate::network::{Assignment, Network, NetworkError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InfluenceError {
    #[error("network has no arc {parent} -> {child}")]
    NoSuchArc { parent: String, child: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("marginal weighting failed: {0}")]
    Weighting(#[from] InferenceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    /// Euclidean distance scaled by 1/sqrt(2), so opposite one-hot rows are 1.
    #[default]
    Euclidean,
    Hellinger,
    /// Largest absolute difference of any single state probability.
    MaxAbs,
}

impl DistanceMetric {
    pub fn distance(self, p: &[f64], q: &[f64]) -> f64 {
        let d = match self {
            DistanceMetric::Euclidean => {
                let sq: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                sq.sqrt() / std::f64::consts::SQRT_2
            }
            DistanceMetric::Hellinger => {
                let bc: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
                (1.0 - bc).max(0.0).sqrt()
            }
            DistanceMetric::MaxAbs => p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
        };
        d.min(1.0)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceMetric::Euclidean => "euclidean",
            DistanceMetric::Hellinger => "hellinger",
            DistanceMetric::MaxAbs => "max_abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Average,
    Maximum,
}

impl Aggregation {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::Average => "average",
            Aggregation::Maximum => "maximum",
        }
    }
}

/// How other-parent configurations are weighted when averaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigWeighting {
    #[default]
    Uniform,
    /// Weight each configuration by its marginal probability under the network.
    Marginal,
}

macro_rules! parse_enum {
    ($ty:ty, $($name:literal => $variant:expr),+ $(,)?) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(format!("unknown value `{other}`")),
                }
            }
        }
    };
}

parse_enum!(DistanceMetric, "euclidean" => DistanceMetric::Euclidean, "hellinger" => DistanceMetric::Hellinger, "max_abs" => DistanceMetric::MaxAbs);
parse_enum!(Aggregation, "average" => Aggregation::Average, "maximum" => Aggregation::Maximum);
parse_enum!(ConfigWeighting, "uniform" => ConfigWeighting::Uniform, "marginal" => ConfigWeighting::Marginal);

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InfluenceSettings {
    pub metric: DistanceMetric,
    pub aggregation: Aggregation,
    pub weighting: ConfigWeighting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceEntry {
    pub parent: String,
    pub child: String,
    pub strength: f64,
    pub metric: DistanceMetric,
    pub aggregation: Aggregation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceReport {
    pub settings: InfluenceSettings,
    /// One entry per arc, strongest first.
    pub entries: Vec<InfluenceEntry>,
}

impl InfluenceReport {
    pub fn strength(&self, parent: &str, child: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.parent == parent && e.child == child)
            .map(|e| e.strength)
    }
}

/// Influence of `parent` on `child` (both node names).
pub fn arc_strength(
    net: &Network,
    parent: &str,
    child: &str,
    settings: InfluenceSettings,
) -> Result<f64, InfluenceError> {
    let p = net.node_index(parent)?;
    let c = net.node_index(child)?;
    let parents = net.parents(c);
    if !parents.contains(&p) {
        return Err(InfluenceError::NoSuchArc {
            parent: parent.to_string(),
            child: child.to_string(),
        });
    }
    let others: Vec<usize> = parents.iter().copied().filter(|&q| q != p).collect();
    let other_cards: Vec<usize> = others.iter().map(|&q| net.node(q).len()).collect();
    let configs: usize = other_cards.iter().product();

    let weights = match settings.weighting {
        ConfigWeighting::Uniform => vec![1.0 / configs as f64; configs],
        ConfigWeighting::Marginal if others.is_empty() => vec![1.0],
        ConfigWeighting::Marginal => joint_posterior(net, &others, &Assignment::new())?,
    };

    let parent_states = net.node(p).len();
    let mut config = Assignment::new();
    let mut weighted = 0.0;
    let mut maximum: f64 = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        let mut rem = k;
        for (i, &q) in others.iter().enumerate().rev() {
            config.bind(q, rem % other_cards[i]);
            rem /= other_cards[i];
        }
        let rows: Vec<&[f64]> = (0..parent_states)
            .map(|s| {
                config.bind(p, s);
                net.cpt_row(c, &config)
            })
            .collect::<Result<_, _>>()?;
        let mut pair_sum = 0.0;
        let mut pairs = 0usize;
        for i in 0..parent_states {
            for j in i + 1..parent_states {
                let d = settings.metric.distance(rows[i], rows[j]);
                pair_sum += d;
                pairs += 1;
                maximum = maximum.max(d);
            }
        }
        weighted += w * pair_sum / pairs as f64;
    }

    let strength = match settings.aggregation {
        Aggregation::Average => weighted,
        Aggregation::Maximum => maximum,
    };
    Ok(strength.clamp(0.0, 1.0))
}

/// Strength of every arc, sorted strongest first (ties keep edge order).
pub fn influence_report(net: &Network, settings: InfluenceSettings) -> Result<InfluenceReport, InfluenceError> {
    let mut entries = net
        .edges()
        .iter()
        .map(|e| {
            Ok(InfluenceEntry {
                parent: e.from.clone(),
                child: e.to.clone(),
                strength: arc_strength(net, &e.from, &e.to, settings)?,
                metric: settings.metric,
                aggregation: settings.aggregation,
            })
        })
        .collect::<Result<Vec<_>, InfluenceError>>()?;
    entries.sort_by(|a, b| b.strength.total_cmp(&a.strength));
    Ok(InfluenceReport { settings, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_network, Cpt, Edge, StateSpace};

    fn binary(name: &str) -> StateSpace {
        StateSpace::new(name, ["0", "1"]).unwrap()
    }

    fn pair(rows: Vec<Vec<f64>>) -> Network {
        build_network(
            vec![binary("X"), binary("Y")],
            vec![Edge::new("X", "Y")],
            vec![Cpt::prior("X", vec![0.5, 0.5]), Cpt::new("Y", ["X"], rows)],
        )
        .unwrap()
    }

    #[test]
    fn deterministic_copy_is_one() {
        let net = pair(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        for metric in [
            DistanceMetric::Euclidean,
            DistanceMetric::Hellinger,
            DistanceMetric::MaxAbs,
        ] {
            let s = arc_strength(
                &net,
                "X",
                "Y",
                InfluenceSettings {
                    metric,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!((s - 1.0).abs() < 1e-12, "{metric}: {s}");
        }
    }

    #[test]
    fn hand_computed_euclidean() {
        let net = pair(vec![vec![0.9, 0.1], vec![0.6, 0.4]]);
        let s = arc_strength(&net, "X", "Y", InfluenceSettings::default()).unwrap();
        assert!((s - 0.3).abs() < 1e-12);
    }

    #[test]
    fn identical_rows_are_zero() {
        let net = pair(vec![vec![0.7, 0.3], vec![0.7, 0.3]]);
        let report = influence_report(&net, InfluenceSettings::default()).unwrap();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].strength, 0.0);
    }

    #[test]
    fn missing_arc() {
        let net = pair(vec![vec![0.7, 0.3], vec![0.7, 0.3]]);
        assert!(matches!(
            arc_strength(&net, "Y", "X", InfluenceSettings::default()),
            Err(InfluenceError::NoSuchArc { .. })
        ));
    }

    #[test]
    fn metric_values() {
        let p = [0.5, 0.5, 0.0];
        let q = [0.0, 0.5, 0.5];
        assert!((DistanceMetric::MaxAbs.distance(&p, &q) - 0.5).abs() < 1e-15);
        // 1 - BC = 1 - 0.5
        assert!((DistanceMetric::Hellinger.distance(&p, &q) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((DistanceMetric::Euclidean.distance(&p, &q) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn marginal_weighting_uses_parent_frequencies() {
        // Z modulates how much X matters; weighting by P(Z) shifts the average.
        let nodes = vec![binary("X"), binary("Z"), binary("Y")];
        let edges = vec![Edge::new("X", "Y"), Edge::new("Z", "Y")];
        let rows = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let net = build_network(
            nodes,
            edges,
            vec![
                Cpt::prior("X", vec![0.5, 0.5]),
                Cpt::prior("Z", vec![0.25, 0.75]),
                Cpt::new("Y", ["X", "Z"], rows),
            ],
        )
        .unwrap();
        let uniform = arc_strength(&net, "X", "Y", InfluenceSettings::default()).unwrap();
        let marginal = arc_strength(
            &net,
            "X",
            "Y",
            InfluenceSettings {
                weighting: ConfigWeighting::Marginal,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((uniform - 0.5).abs() < 1e-12);
        assert!((marginal - 0.75).abs() < 1e-12);
        let max = arc_strength(
            &net,
            "X",
            "Y",
            InfluenceSettings {
                aggregation: Aggregation::Maximum,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(max, 1.0);
    }

    #[test]
    fn parse_names() {
        assert_eq!("max_abs".parse::<DistanceMetric>().unwrap(), DistanceMetric::MaxAbs);
        assert_eq!("maximum".parse::<Aggregation>().unwrap(), Aggregation::Maximum);
        assert!("median".parse::<Aggregation>().is_err());
    }
}
