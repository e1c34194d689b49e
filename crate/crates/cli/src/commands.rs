use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use bnlf::data::{
    parse_csv_records, validate_dataset_stats, DatasetStats, ParseOutput, Severity, CORPUS_NODE, SENTIMENT_NODE,
};
use bnlf::inference::{posterior, InferenceError};
use bnlf::pipeline::{predict_batch, BatchOutput, FusionNodes, PipelineError, DEFAULT_MODELS};
use bnlf::scenario::{posterior_table, standard_scenarios};
use bnlf::table::{fmt4, render_all, Table};
use bnlf::{
    evaluate, fit, influence_report, parse_records, BnlfConfig, EvaluationReport, InfluenceReport, InfluenceSettings,
    LabelMap, ModelFile, PredictionRecord, SmoothingConfig, SplitManifest, SplitSpec,
};
use serde_json::{json, Value};

use crate::args::{EvaluateArgs, FitArgs, Format, InferArgs, InfluenceArgs, PredictArgs, ReportArgs, ValidateArgs};
use crate::error::{CliError, Result};

/// A command result: tables for humans, one JSON document for machines.
struct Rendered {
    tables: Vec<Table>,
    json: Value,
}

fn emit(r: &Rendered, format: Format, out: Option<&Path>) -> Result<()> {
    if let Some(path) = out {
        write_file(path, &pretty(&r.json))?;
    }
    let text = match format {
        Format::Json => pretty(&r.json),
        Format::Csv => r.tables.iter().map(Table::to_csv).collect::<Vec<_>>().join("\n"),
        Format::Table => render_all(&r.tables),
    };
    let mut stdout = io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| CliError::Internal(format!("writing stdout: {e}")))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| CliError::write(path, e))
}

fn read_records(path: &Path) -> Result<ParseOutput> {
    let labels = LabelMap::default();
    let file = fs::File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        parse_csv_records(file, &labels).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
    } else {
        parse_records(io::BufReader::new(file), &labels)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
    };
    Ok(parsed)
}

/// Records for commands other than `validate`: issues are summarized on
/// stderr and do not stop the run.
fn load_records(path: &Path) -> Result<Vec<PredictionRecord>> {
    let parsed = read_records(path)?;
    if !parsed.issues.is_empty() {
        eprintln!(
            "warning: {} input issue(s) in {}; run `bnlf validate` for details",
            parsed.issues.len(),
            path.display()
        );
    }
    if parsed.records.is_empty() {
        return Err(CliError::Data(format!("{}: no valid records", path.display())));
    }
    Ok(parsed.records)
}

fn load_model(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Model(format!("{}: {e}", path.display())))?;
    ModelFile::from_json(&text).map_err(|e| CliError::Model(format!("{}: {e}", path.display())))
}

fn manifest_path(model_path: &Path) -> PathBuf {
    let stem = model_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    model_path.with_file_name(format!("{stem}.manifest.json"))
}

fn load_manifest(model_path: &Path, model: &ModelFile) -> Result<Option<SplitManifest>> {
    let Some(name) = &model.config.manifest else {
        return Ok(None);
    };
    let path = model_path.parent().unwrap_or(Path::new("")).join(name);
    let text = fs::read_to_string(&path).map_err(|e| CliError::Model(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::Model(format!("{}: {e}", path.display())))
}

/// The records to score: the manifest's test partition when the model has one.
fn test_partition(
    model_path: &Path,
    model: &ModelFile,
    records: Vec<PredictionRecord>,
) -> Result<(Vec<PredictionRecord>, &'static str)> {
    match load_manifest(model_path, model)? {
        Some(m) => {
            let part = m.apply(&records).map_err(|e| CliError::Data(e.to_string()))?;
            Ok((part.test, "test partition"))
        }
        None => Ok((records, "all records")),
    }
}

fn kv_table(title: &str, rows: &[(&str, String)]) -> Table {
    let mut t = Table::new(title, ["Field", "Value"]);
    for (k, v) in rows {
        t.push([k.to_string(), v.clone()]);
    }
    t
}

fn stats_table(stats: &DatasetStats) -> Table {
    let mut t = Table::new(
        "Dataset statistics",
        ["Corpus", "Negative", "Neutral", "Positive", "Total"],
    );
    for row in stats.corpora.iter().chain(std::iter::once(&stats.total)) {
        let cell = |i: usize| format!("{} ({:.2}%)", row.counts[i], row.percentages[i]);
        t.push([row.corpus.clone(), cell(0), cell(1), cell(2), row.total.to_string()]);
    }
    t
}

fn issues_table(parsed: &ParseOutput) -> Table {
    let mut t = Table::new("Input issues", ["Line", "Id", "Kind", "Severity", "Message"]);
    for i in &parsed.issues {
        t.push([
            i.line.map(|l| l.to_string()).unwrap_or_default(),
            i.id.clone().unwrap_or_default(),
            to_value(&i.kind).as_str().unwrap_or_default().to_string(),
            format!("{:?}", i.kind.severity()).to_lowercase(),
            i.message.clone(),
        ]);
    }
    t
}

fn influence_table(report: &InfluenceReport) -> Table {
    let title = format!(
        "Strength of influence ({}, {})",
        report.settings.metric, report.settings.aggregation
    );
    let mut t = Table::new(title, ["Parent", "Child", "Strength"]);
    for e in &report.entries {
        t.push([e.parent.clone(), e.child.clone(), fmt4(e.strength)]);
    }
    t
}

pub fn validate(args: ValidateArgs) -> Result<()> {
    let parsed = read_records(&args.records)?;
    let stats = validate_dataset_stats(&parsed.records);
    let errors = parsed.error_count();
    let dropped = parsed
        .issues
        .iter()
        .filter(|i| i.kind.severity() == Severity::Dropped)
        .count();
    let summary = kv_table(
        "Validation",
        &[
            ("valid records", parsed.records.len().to_string()),
            ("errors", errors.to_string()),
            ("dropped", dropped.to_string()),
            ("warnings", (parsed.issues.len() - errors - dropped).to_string()),
        ],
    );
    let mut tables = vec![summary, stats_table(&stats)];
    if !parsed.issues.is_empty() {
        tables.push(issues_table(&parsed));
    }
    let rendered = Rendered {
        tables,
        json: json!({
            "records": parsed.records.len(),
            "errors": errors,
            "stats": stats,
            "issues": parsed.issues,
        }),
    };
    emit(&rendered, args.output.format, args.output.out.as_deref())?;
    if errors > 0 {
        return Err(CliError::Data(format!(
            "{errors} invalid line(s) in {}",
            args.records.display()
        )));
    }
    Ok(())
}

pub fn fit_cmd(args: FitArgs) -> Result<()> {
    if !(args.split > 0.0 && args.split < 1.0) {
        return Err(CliError::Usage(format!(
            "--split must be in (0, 1), got {}",
            args.split
        )));
    }
    let smoothing = SmoothingConfig::additive(args.alpha).map_err(|e| CliError::Usage(e.to_string()))?;
    let cfg = BnlfConfig {
        model_names: args.models.clone(),
        smoothing,
        split: SplitSpec {
            train_fraction: args.split,
            seed: args.seed,
            stratified: false,
        },
        corpus_states: None,
    };
    cfg.validate()?;
    let records = load_records(&args.records)?;
    let mut fitted = fit(&cfg, &records)?;

    let manifest_file = manifest_path(&args.out);
    let manifest_name = manifest_file
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    fitted.model.config.manifest = Some(manifest_name);
    write_file(&args.out, &fitted.model.to_json())?;
    let mut manifest_text = fitted.manifest.to_json();
    manifest_text.push('\n');
    write_file(&manifest_file, &manifest_text)?;

    let cfg = &fitted.model.config;
    let rendered = Rendered {
        tables: vec![kv_table(
            "Fitted model",
            &[
                ("model", args.out.display().to_string()),
                ("manifest", manifest_file.display().to_string()),
                ("models", cfg.models.join(",")),
                ("corpora", cfg.corpus_states.join(",")),
                ("train ids", fitted.manifest.train_ids.len().to_string()),
                ("test ids", fitted.manifest.test_ids.len().to_string()),
                ("training rows", cfg.train_records.to_string()),
                ("excluded", fitted.issues.len().to_string()),
                ("alpha", args.alpha.to_string()),
                ("seed", args.seed.to_string()),
            ],
        )],
        json: json!({
            "model": args.out,
            "manifest": manifest_file,
            "config": cfg,
            "train_ids": fitted.manifest.train_ids.len(),
            "test_ids": fitted.manifest.test_ids.len(),
            "excluded": fitted.issues,
        }),
    };
    emit(&rendered, args.format, None)
}

fn batch_summary(out: &BatchOutput) -> Rendered {
    let partial = out.predictions.iter().filter(|p| p.is_partial()).count();
    let unseen = out.predictions.len() - partial - out.predictions.iter().filter(|p| p.flags.is_empty()).count();
    Rendered {
        tables: vec![kv_table(
            "Predictions",
            &[
                ("predicted", out.predictions.len().to_string()),
                ("partial evidence", partial.to_string()),
                ("unseen configuration", unseen.to_string()),
                ("rejected", out.rejected.len().to_string()),
            ],
        )],
        json: json!({
            "predicted": out.predictions.len(),
            "partial_evidence": partial,
            "unseen_configuration": unseen,
            "rejected": out.rejected,
        }),
    }
}

pub fn predict(args: PredictArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let records = load_records(&args.records)?;
    let out = predict_batch(&model.network, &records, &model.config.models)?;
    let summary = batch_summary(&out);
    match &args.out {
        Some(path) => {
            write_file(path, &out.to_jsonl())?;
            emit(&summary, args.format, None)?;
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(out.to_jsonl().as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Internal(format!("writing stdout: {e}")))?;
        }
    }
    for r in &out.rejected {
        eprintln!("rejected {}: {}", r.id, r.reason);
    }
    if !out.rejected.is_empty() {
        return Err(CliError::Data(format!("{} record(s) rejected", out.rejected.len())));
    }
    Ok(())
}

/// Score the model's test partition (or all records without a manifest).
fn evaluation(
    model_path: &Path,
    model: &ModelFile,
    records: Vec<PredictionRecord>,
) -> Result<(EvaluationReport, Value)> {
    let (test, scope) = test_partition(model_path, model, records)?;
    let out = predict_batch(&model.network, &test, &model.config.models)?;
    for r in &out.rejected {
        eprintln!("rejected {}: {}", r.id, r.reason);
    }
    let report =
        evaluate(&test, &model.config.models, Some(&out.predictions)).map_err(|e| CliError::Data(e.to_string()))?;
    let meta = json!({ "scope": scope, "rejected": out.rejected });
    Ok((report, meta))
}

fn report_value(report: &EvaluationReport) -> Value {
    serde_json::from_str(&report.to_json()).expect("report is json")
}

pub fn evaluate_cmd(args: EvaluateArgs) -> Result<()> {
    let records = load_records(&args.records)?;
    let (report, meta) = match &args.model {
        Some(path) => {
            let model = load_model(path)?;
            evaluation(path, &model, records)?
        }
        None => {
            let models = args
                .models
                .clone()
                .unwrap_or_else(|| DEFAULT_MODELS.map(String::from).to_vec());
            let report = evaluate(&records, &models, None).map_err(|e| CliError::Data(e.to_string()))?;
            (report, json!({ "scope": "all records", "rejected": [] }))
        }
    };
    let mut json = report_value(&report);
    json["scope"] = meta["scope"].clone();
    json["rejected"] = meta["rejected"].clone();
    let rendered = Rendered {
        tables: report.tables(),
        json,
    };
    emit(&rendered, args.output.format, args.output.out.as_deref())
}

pub fn infer(args: InferArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let net = &model.network;
    let nodes = FusionNodes::resolve(net, &model.config.models)?;
    let labels = LabelMap::default();
    let mut evidence = bnlf::Assignment::new();
    for (name, state) in &args.set {
        let node = net
            .node_index(name)
            .map_err(|_| CliError::Data(format!("unknown node `{name}`")))?;
        if node == nodes.sentiment {
            return Err(CliError::Usage(format!(
                "`{SENTIMENT_NODE}` is the query node and cannot be set"
            )));
        }
        let canonical = if node == nodes.corpus {
            state.clone()
        } else {
            labels
                .get(state)
                .map(|s| s.as_str().to_string())
                .unwrap_or_else(|| state.clone())
        };
        let index = net.node(node).index_of(&canonical).ok_or_else(|| {
            if node == nodes.corpus {
                CliError::Data(PipelineError::UnknownCorpusState(state.clone()).to_string())
            } else {
                CliError::Data(format!("`{state}` is not a state of node `{name}`"))
            }
        })?;
        evidence.bind(node, index);
    }
    let post = posterior(net, nodes.sentiment, &evidence).map_err(|e| match e {
        InferenceError::InconsistentEvidence => CliError::Data(e.to_string()),
        other => CliError::Internal(other.to_string()),
    })?;
    let states = net.node(nodes.sentiment).states();
    let label = &states[post.argmax()];
    let bound: serde_json::Map<String, Value> = evidence
        .iter()
        .map(|(n, s)| {
            (
                net.node(n).name().to_string(),
                Value::from(net.node(n).states()[s].clone()),
            )
        })
        .collect();
    let described = if evidence.is_empty() {
        "no evidence".to_string()
    } else {
        evidence
            .iter()
            .map(|(n, s)| format!("{}={}", net.node(n).name(), net.node(n).states()[s]))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let dist: serde_json::Map<String, Value> = states
        .iter()
        .zip(&post.distribution)
        .map(|(s, p)| (s.clone(), Value::from(*p)))
        .collect();
    let mut table = posterior_table(
        &format!("P({SENTIMENT_NODE} | {described})"),
        &post.distribution,
        states,
    );
    table.push(["label".to_string(), label.clone()]);
    let rendered = Rendered {
        tables: vec![table],
        json: json!({
            "query": SENTIMENT_NODE,
            "evidence": bound,
            "posterior": dist,
            "label": label,
        }),
    };
    emit(&rendered, args.output.format, args.output.out.as_deref())
}

fn settings(metric: bnlf::DistanceMetric, aggregation: bnlf::Aggregation) -> InfluenceSettings {
    InfluenceSettings {
        metric,
        aggregation,
        ..Default::default()
    }
}

pub fn influence(args: InfluenceArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let report = influence_report(&model.network, settings(args.metric, args.agg))
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let rendered = Rendered {
        tables: vec![influence_table(&report)],
        json: to_value(&report),
    };
    emit(&rendered, args.output.format, args.output.out.as_deref())
}

pub fn report(args: ReportArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let records = load_records(&args.records)?;
    let stats = validate_dataset_stats(&records);
    let (evaluation_report, meta) = evaluation(&args.model, &model, records)?;
    let influence = influence_report(&model.network, settings(args.metric, args.agg))
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let scenarios = standard_scenarios(&model)?;

    let mut tables = vec![stats_table(&stats)];
    tables.extend(evaluation_report.tables());
    tables.push(influence_table(&influence));
    tables.extend(scenarios.iter().map(|s| s.table()));
    let mut evaluation_json = report_value(&evaluation_report);
    evaluation_json["scope"] = meta["scope"].clone();
    evaluation_json["rejected"] = meta["rejected"].clone();
    let rendered = Rendered {
        tables,
        json: json!({
            "dataset": stats,
            "corpus_node": CORPUS_NODE,
            "evaluation": evaluation_json,
            "influence": influence,
            "scenarios": scenarios,
        }),
    };
    emit(&rendered, args.output.format, args.output.out.as_deref())
}
