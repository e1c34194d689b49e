mod common;

use std::time::{Duration, Instant};

use bnlf::data::{CORPUS_NODE, SENTIMENT_NODE};
use bnlf::evaluation::{evaluate, BNLF, BNLF_COMPLETE};
use bnlf::inference::posterior;
use bnlf::network::Assignment;
use bnlf::pipeline::{fit_on, PipelineError, PredictionFlag};
use bnlf::synthetic::SyntheticSpec;
use bnlf::{build_bnlf_structure, fit, predict_batch, BnlfConfig, ModelFile, Sentiment, SmoothingConfig};
use common::{models, record, sentiment};

fn cfg_with_corpora(n: usize) -> BnlfConfig {
    BnlfConfig {
        corpus_states: Some((0..n).map(|i| format!("c{i}")).collect()),
        ..BnlfConfig::default()
    }
}

#[test]
fn structure_shapes() {
    let s = build_bnlf_structure(&cfg_with_corpora(3)).unwrap();
    assert_eq!((s.node_count(), s.edges().len()), (5, 7));
    assert_eq!(s.row_count(s.node_index(SENTIMENT_NODE).unwrap()), 81);

    let one = BnlfConfig {
        model_names: vec!["m".into()],
        ..cfg_with_corpora(3)
    };
    let s = build_bnlf_structure(&one).unwrap();
    assert_eq!((s.node_count(), s.edges().len()), (3, 3));

    let four = BnlfConfig {
        model_names: ["a", "b", "c", "d"].map(String::from).to_vec(),
        ..cfg_with_corpora(3)
    };
    let s = build_bnlf_structure(&four).unwrap();
    assert_eq!((s.node_count(), s.edges().len()), (6, 9));
    assert_eq!(s.row_count(s.node_index(SENTIMENT_NODE).unwrap()), 243);

    let none = BnlfConfig {
        model_names: vec![],
        ..cfg_with_corpora(3)
    };
    assert!(matches!(
        build_bnlf_structure(&none),
        Err(PipelineError::EmptyModelList)
    ));
}

#[test]
fn full_scale_fit_is_fast() {
    let records = SyntheticSpec::home_corpus(5_136, [0.9; 3], 0.55, 1).generate();
    let cfg = BnlfConfig::default();
    let start = Instant::now();
    let out = fit(&cfg, &records).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(out.manifest.train_ids.len(), 12_327);
    assert!(elapsed < Duration::from_secs(5), "fit took {elapsed:?}");
}

#[test]
fn reloaded_model_predicts_bit_identically() {
    let records = SyntheticSpec::home_corpus(300, [0.9; 3], 0.55, 2).generate();
    let cfg = BnlfConfig::default();
    let fitted = fit(&cfg, &records).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    std::fs::write(&path, fitted.model.to_json()).unwrap();
    let reloaded = ModelFile::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(reloaded.to_json(), fitted.model.to_json());
    let a = predict_batch(&fitted.model.network, &records, &cfg.model_names).unwrap();
    let b = predict_batch(&reloaded.network, &records, &reloaded.config.models).unwrap();
    for (x, y) in a.predictions.iter().zip(&b.predictions) {
        assert!(x
            .posterior
            .iter()
            .zip(&y.posterior)
            .all(|(p, q)| p.to_bits() == q.to_bits()));
    }
    assert_eq!(a.to_jsonl(), b.to_jsonl());
}

#[test]
fn missing_model_is_marginalized_against_its_corpus_cpt() {
    let records = SyntheticSpec::home_corpus(200, [0.9; 3], 0.55, 3).generate();
    let fitted = fit(&BnlfConfig::default(), &records).unwrap();
    let net = &fitted.model.network;
    let idx = |n: &str| net.node_index(n).unwrap();
    let (corpus, fb, rb, bt, sent) = (
        idx(CORPUS_NODE),
        idx("finbert"),
        idx("roberta"),
        idx("bertweet"),
        idx(SENTIMENT_NODE),
    );

    let rec = record(
        "q",
        "tfns",
        &[Some(Sentiment::Negative), None, Some(Sentiment::Positive)],
        Sentiment::Neutral,
    );
    let out = predict_batch(net, &[rec], &models()).unwrap();
    let p = &out.predictions[0];
    assert_eq!(p.flags, [PredictionFlag::PartialEvidence]);
    assert_eq!(p.missing_models, ["roberta"]);

    // sum over roberta's states of P(roberta | corpus) P(sent | corpus, all models), renormalized
    let c = net.state_index(corpus, "tfns").unwrap();
    let base = Assignment::new().with(corpus, c).with(fb, 0).with(bt, 2);
    let mut want = [0.0; 3];
    for r in 0..3 {
        let w = net.cpt_row(rb, &base).unwrap()[r];
        let row = net.cpt_row(sent, &base.clone().with(rb, r)).unwrap();
        for s in 0..3 {
            want[s] += w * row[s];
        }
    }
    // the finbert/bertweet likelihoods cancel in normalization except through roberta
    let pf = |r: usize| {
        let a = base.clone().with(rb, r);
        net.cpt_row(fb, &a).unwrap()[0] * net.cpt_row(bt, &a).unwrap()[2]
    };
    assert!(pf(0) == pf(1) && pf(1) == pf(2));
    let z: f64 = want.iter().sum();
    for (got, w) in p.posterior.iter().zip(want) {
        assert!((got - w / z).abs() < 1e-12);
    }
    let direct = posterior(net, sent, &base).unwrap();
    assert_eq!(direct.distribution, p.posterior);
}

#[test]
fn complementary_errors_are_fused_above_every_model() {
    for seed in 0..3 {
        let records = SyntheticSpec::home_corpus(1500, [0.9; 3], 0.55, seed).generate();
        let cfg = BnlfConfig::default();
        let fitted = fit(&cfg, &records).unwrap();
        let test = fitted.manifest.apply(&records).unwrap().test;
        let out = predict_batch(&fitted.model.network, &test, &cfg.model_names).unwrap();
        let report = evaluate(&test, &cfg.model_names, Some(&out.predictions)).unwrap();
        let fused = report.accuracy(BNLF).unwrap();
        for m in &cfg.model_names {
            assert!(fused > report.accuracy(m).unwrap(), "seed {seed}: bnlf {fused} vs {m}");
        }
    }
}

#[test]
fn noiseless_corpus_is_learned_exactly() {
    // gold is a deterministic function of (corpus, labels)
    let oracle = |c: usize, l: [usize; 3]| sentiment(c + l[0] + 2 * l[1] + l[2]);
    let mut records = Vec::new();
    for c in 0..3 {
        for k in 0..27 {
            let l = [k / 9, (k / 3) % 3, k % 3];
            for rep in 0..20 {
                let labels: Vec<_> = l.iter().map(|&i| Some(sentiment(i))).collect();
                records.push(record(
                    format!("c{c}-{k}-{rep}"),
                    &format!("c{c}"),
                    &labels,
                    oracle(c, l),
                ));
            }
        }
    }
    let cfg = BnlfConfig {
        smoothing: SmoothingConfig::additive(0.01).unwrap(),
        ..BnlfConfig::default()
    };
    let (model, _) = fit_on(&cfg, &records).unwrap();
    let out = predict_batch(&model.network, &records, &cfg.model_names).unwrap();
    let correct = out
        .predictions
        .iter()
        .zip(&records)
        .filter(|(p, r)| p.label == r.gold)
        .count();
    assert_eq!(correct, records.len());
}

#[test]
fn unseen_configuration_is_uniform_and_flagged() {
    let train = vec![
        record("a", "tfns", &[Some(Sentiment::Negative); 3], Sentiment::Negative),
        record("b", "fiqa", &[Some(Sentiment::Positive); 3], Sentiment::Positive),
    ];
    let (model, _) = fit_on(&BnlfConfig::default(), &train).unwrap();
    let probe = record(
        "p",
        "tfns",
        &[
            Some(Sentiment::Positive),
            Some(Sentiment::Neutral),
            Some(Sentiment::Negative),
        ],
        Sentiment::Neutral,
    );
    let out = predict_batch(&model.network, &[probe], &models()).unwrap();
    let p = &out.predictions[0];
    assert_eq!(p.posterior, [1.0 / 3.0; 3]);
    assert_eq!(p.label, Sentiment::Negative);
    assert_eq!(p.flags, [PredictionFlag::UnseenConfiguration]);
}

#[test]
fn unknown_corpus_is_rejected_not_predicted() {
    let train = vec![
        record("a", "tfns", &[Some(Sentiment::Negative); 3], Sentiment::Negative),
        record("b", "fiqa", &[Some(Sentiment::Negative); 3], Sentiment::Negative),
    ];
    let (model, _) = fit_on(&BnlfConfig::default(), &train).unwrap();
    let probe = record("p", "mystery", &[Some(Sentiment::Negative); 3], Sentiment::Negative);
    let out = predict_batch(&model.network, &[probe], &models()).unwrap();
    assert!(out.predictions.is_empty());
    assert_eq!(out.rejected[0].id, "p");
}

#[test]
fn evaluation_reports_strict_and_lenient_fusion() {
    let mut records = SyntheticSpec::home_corpus(100, [0.9; 3], 0.55, 4).generate();
    let fitted = fit(&BnlfConfig::default(), &records).unwrap();
    records[0].preds.remove("roberta");
    let out = predict_batch(&fitted.model.network, &records, &models()).unwrap();
    let report = evaluate(&records, &models(), Some(&out.predictions)).unwrap();
    assert_eq!(report.method(BNLF).unwrap().evaluated, records.len());
    assert_eq!(report.method(BNLF_COMPLETE).unwrap().evaluated, records.len() - 1);
}
