use std::path::{Path, PathBuf};

use infoband::pipeline::{
    emit_report, join_ratings, parse_ratings, prompts_from_lines, run_experiment, run_on_prompts, ExperimentConfig,
    RatingsRecord, Report, ReportFormat, REFERENCE_SYSTEM,
};
use infoband::lm::train_ngram;
use infoband::Error;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn mini_report() -> Report {
    Report::load(&data("mini_report.json")).unwrap()
}

fn record(ctx: &str, system: &str, criterion: &str, rater: &str, score: u8) -> RatingsRecord {
    RatingsRecord {
        context_id: ctx.into(),
        system: system.into(),
        criterion: criterion.into(),
        rater_id: rater.into(),
        score,
    }
}

/// Every output of every context, rated by two raters on two criteria.
fn full_ratings(report: &Report, score: impl Fn(&str) -> u8) -> Vec<RatingsRecord> {
    let mut out = Vec::new();
    for ctx in &report.contexts {
        for o in &ctx.outputs {
            for criterion in ["fluency", "adequacy"] {
                for rater in ["r1", "r2"] {
                    out.push(record(&ctx.id, &o.system, criterion, rater, score(&o.system)));
                }
            }
        }
    }
    out
}

#[test]
fn config_run_matches_golden_report() {
    let config = ExperimentConfig::from_file(&data("mini.cfg")).unwrap();
    let report = run_experiment(&config).unwrap();
    assert_eq!(report.to_json().unwrap(), std::fs::read_to_string(data("mini_report.json")).unwrap());
}

#[test]
fn json_round_trip_is_bit_exact() {
    let report = mini_report();
    let json = report.to_json().unwrap();
    let back = Report::from_json(&json).unwrap();
    assert_eq!(back, report);
    for (a, b) in back.contexts.iter().zip(&report.contexts) {
        assert_eq!(a.estimate.mean.to_bits(), b.estimate.mean.to_bits());
        for (x, y) in a.outputs.iter().zip(&b.outputs) {
            assert_eq!(x.profile.total.to_bits(), y.profile.total.to_bits());
            assert_eq!(x.deviation.to_bits(), y.deviation.to_bits());
        }
    }
    assert_eq!(back.to_json().unwrap(), json);
}

#[test]
fn wrong_schema_version_is_rejected() {
    let json = mini_report().to_json().unwrap().replacen("\"schema_version\": 1", "\"schema_version\": 99", 1);
    assert!(Report::from_json(&json).is_err());
}

#[test]
fn empty_systems_report_is_valid_json() {
    let model = train_ngram(&["abab", "baba", "aabb"], 2, 0.1, 6).unwrap();
    let mut config = ExperimentConfig::new("unused");
    config.systems.clear();
    config.entropy_samples = 10;
    let prompts = prompts_from_lines(&["abab", "bbaa"], 1, None);
    let report = run_on_prompts(&model, &prompts, &config).unwrap();
    let json = report.to_json().unwrap();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["settings"]["systems"], serde_json::json!([]));
    for ctx in value["contexts"].as_array().unwrap() {
        // Only the reference remains.
        assert_eq!(ctx["outputs"].as_array().unwrap().len(), 1);
    }
    let deviations = value["deviations"].as_array().unwrap();
    assert_eq!(deviations.len(), 1);
    assert_eq!(deviations[0]["system"], REFERENCE_SYSTEM);
    // Only the pooled "all" entry, with nothing in it.
    let histograms = value["histograms"].as_array().unwrap();
    assert_eq!(histograms.len(), 1);
    assert_eq!(histograms[0]["total"]["bins"], serde_json::json!([]));
    assert!(value["ratings"].is_null());
    assert_eq!(Report::from_json(&json).unwrap(), report);
}

#[test]
fn reference_always_best_gives_rank1_proportion_one() {
    let report = mini_report();
    let ratings = full_ratings(&report, |s| if s == REFERENCE_SYSTEM { 7 } else { 0 });
    let joined = join_ratings(&report, &ratings).unwrap();
    let analysis = joined.ratings.as_ref().unwrap();
    assert_eq!(analysis.reference_rank1_proportion, Some(1.0));
    let first_three: Vec<&str> = report.settings.systems.iter().take(3).map(|s| s.name.as_str()).collect();
    for ctx in &analysis.contexts {
        assert_eq!(ctx.rank1, vec![REFERENCE_SYSTEM.to_string()]);
        // All decoded strings tie at 0, so configuration order decides the top 3.
        assert_eq!(ctx.rated_set[0], REFERENCE_SYSTEM);
        assert_eq!(&ctx.rated_set[1..], &first_three[..]);
    }
    assert_eq!(analysis.band_tests[0].pooling, "pooled");
    assert!(analysis.band_tests[0].result.is_some() || analysis.band_tests[0].error.is_some());
    // Pooled plus the reference plus one per system, for both analyses.
    assert_eq!(analysis.band_tests.len(), report.settings.systems.len() + 2);
    assert_eq!(analysis.score_splits.len(), report.settings.systems.len() + 2);
}

#[test]
fn two_systems_rank_one_and_two() {
    let report = mini_report();
    let ctx = &report.contexts[0].id;
    let ratings = vec![record(ctx, "greedy", "fluency", "r1", 7), record(ctx, "nucleus", "fluency", "r1", 3)];
    let joined = join_ratings(&report, &ratings).unwrap();
    let scores = &joined.ratings.unwrap().contexts[0].scores;
    let ranks: Vec<(&str, usize)> = scores.iter().map(|s| (s.system.as_str(), s.rank)).collect();
    assert_eq!(ranks, vec![("greedy", 1), ("nucleus", 2)]);
}

#[test]
fn tied_scores_share_first_rank() {
    let report = mini_report();
    let ctx = &report.contexts[0].id;
    let ratings = vec![
        record(ctx, "greedy", "fluency", "r1", 7),
        record(ctx, "ancestral", "fluency", "r1", 7),
        record(ctx, "top_k", "fluency", "r1", 3),
    ];
    let analysis = join_ratings(&report, &ratings).unwrap().ratings.unwrap();
    let c = &analysis.contexts[0];
    assert_eq!(c.rank1, vec!["greedy".to_string(), "ancestral".to_string()]);
    assert_eq!(c.scores.iter().map(|s| s.rank).collect::<Vec<_>>(), vec![1, 1, 3]);
    // No reference rating here, so no proportion.
    assert_eq!(analysis.reference_rank1_proportion, None);
}

#[test]
fn median_then_mean_aggregation() {
    let report = mini_report();
    let ctx = &report.contexts[1].id;
    let ratings = vec![
        record(ctx, "greedy", "fluency", "r1", 1),
        record(ctx, "greedy", "fluency", "r2", 6),
        record(ctx, "greedy", "fluency", "r3", 5),
        record(ctx, "greedy", "adequacy", "r1", 2),
        record(ctx, "greedy", "adequacy", "r2", 4),
    ];
    let analysis = join_ratings(&report, &ratings).unwrap().ratings.unwrap();
    let s = &analysis.contexts[0].scores[0];
    // median(1,6,5) = 5, median(2,4) = 3, mean = 4.
    assert_eq!(s.score, 4.0);
    assert_eq!(s.ratings, 5);
}

#[test]
fn joining_leaves_information_untouched() {
    let report = mini_report();
    let ratings = full_ratings(&report, |s| (s.len() % 8) as u8);
    let joined = join_ratings(&report, &ratings).unwrap();
    assert_eq!(joined.contexts, report.contexts);
    assert_eq!(joined.histograms, report.histograms);
    assert_eq!(joined.deviations, report.deviations);
    assert_eq!(joined.settings, report.settings);
}

#[test]
fn unknown_ids_are_errors() {
    let report = mini_report();
    let bad_ctx = vec![record("c9999", "greedy", "fluency", "r1", 3)];
    assert!(matches!(join_ratings(&report, &bad_ctx), Err(Error::UnknownContext(id)) if id == "c9999"));
    let ctx = &report.contexts[0].id;
    let bad_sys = vec![record(ctx, "beam_99", "fluency", "r1", 3)];
    assert!(matches!(join_ratings(&report, &bad_sys), Err(Error::UnknownSystem { system, .. }) if system == "beam_99"));
}

#[test]
fn ratings_csv_through_to_bundle() {
    let report = mini_report();
    let mut csv = String::from("rater_id,score,context_id,system,criterion\n");
    for r in full_ratings(&report, |s| if s == REFERENCE_SYSTEM { 6 } else { 2 }) {
        csv.push_str(&format!("{},{},{},{},{}\n", r.rater_id, r.score, r.context_id, r.system, r.criterion));
    }
    let ratings = parse_ratings(csv.as_bytes(), "inline").unwrap();
    let joined = join_ratings(&report, &ratings).unwrap();

    let dir = tempfile::tempdir().unwrap();
    emit_report(&report, ReportFormat::CsvBundle, dir.path()).unwrap();
    for f in ["histogram_total.csv", "histogram_normalized.csv", "histogram_deviation.csv", "deviations.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert!(!dir.path().join("band_test.csv").exists());

    emit_report(&joined, ReportFormat::CsvBundle, dir.path()).unwrap();
    for f in ["score_vs_information.csv", "band_split.csv", "band_test.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let deviations = std::fs::read_to_string(dir.path().join("deviations.csv")).unwrap();
    let outputs: usize = report.contexts.iter().map(|c| c.outputs.len()).sum();
    assert_eq!(deviations.lines().count(), outputs + 1);

    let json_path = dir.path().join("joined.json");
    emit_report(&joined, ReportFormat::Json, &json_path).unwrap();
    assert_eq!(Report::load(&json_path).unwrap(), joined);
}

#[test]
fn missing_corpus_is_a_data_error() {
    let mut config = ExperimentConfig::new(data("no_such_corpus.txt"));
    config.heldout = Some(data("mini_heldout.txt"));
    assert!(matches!(run_experiment(&config), Err(Error::Io { .. })));
}
