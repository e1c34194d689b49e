use std::path::PathBuf;

use bnlf::{Aggregation, DistanceMetric};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bnlf",
    version,
    about = "Bayesian-network fusion of sentiment classifier predictions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a record file and report issues and per-corpus class statistics.
    Validate(ValidateArgs),
    /// Split records, learn the fusion network, write the model and split manifest.
    Fit(FitArgs),
    /// Fuse every record's model predictions into a posterior and label.
    Predict(PredictArgs),
    /// Score individual models, baselines and the fused predictor on the test partition.
    Evaluate(EvaluateArgs),
    /// Posterior of the sentiment node under fixed evidence.
    Infer(InferArgs),
    /// Strength of influence for every arc of a fitted network.
    Influence(InfluenceArgs),
    /// Dataset statistics, evaluation, influence and standard scenarios in one report.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    #[default]
    Table,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Stdout format.
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Write the full machine-readable result to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Prediction records (JSONL, or CSV by `.csv` extension).
    #[arg(long)]
    pub records: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub records: PathBuf,
    /// Comma-separated model names, in fusion order.
    #[arg(long, value_delimiter = ',', default_value = "finbert,roberta,bertweet")]
    pub models: Vec<String>,
    /// Training fraction.
    #[arg(long, default_value_t = 0.8)]
    pub split: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Additive smoothing pseudo-count.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Model file path; the manifest is written beside it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub records: PathBuf,
    /// Prediction JSONL path; without it the JSONL goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub records: PathBuf,
    /// Fitted model; its split manifest selects the test partition.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Models for the voting and averaging baselines when no model is given.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Evidence binding, repeatable.
    #[arg(long = "set", value_name = "NODE=STATE", value_parser = parse_binding)]
    pub set: Vec<(String, String)>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct InfluenceArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "euclidean", value_parser = parse_from_str::<DistanceMetric>)]
    pub metric: DistanceMetric,
    #[arg(long, default_value = "average", value_parser = parse_from_str::<Aggregation>)]
    pub agg: Aggregation,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "euclidean", value_parser = parse_from_str::<DistanceMetric>)]
    pub metric: DistanceMetric,
    #[arg(long, default_value = "average", value_parser = parse_from_str::<Aggregation>)]
    pub agg: Aggregation,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_binding(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((node, state)) if !node.trim().is_empty() && !state.trim().is_empty() => {
            Ok((node.trim().to_string(), state.trim().to_string()))
        }
        _ => Err(format!("expected NODE=STATE, got `{s}`")),
    }
}

fn parse_from_str<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}
