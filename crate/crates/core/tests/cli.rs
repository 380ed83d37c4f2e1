use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn infoband(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infoband")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn trained(dir: &Path) -> String {
    let model = dir.join("model.json");
    let out = infoband(&[
        "train",
        "--corpus",
        data("mini_train.txt").to_str().unwrap(),
        "--max-length",
        "24",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    model.to_str().unwrap().to_string()
}

#[test]
fn model_subcommands_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained(dir.path());

    let decoded = json(&infoband(&["decode", "--model", &model, "--prompt", "th", "--strategy", "beam_3"]));
    assert_eq!(decoded["system"], "beam_3");
    let text = decoded["text"].as_str().unwrap().to_string();

    let scored = json(&infoband(&["score", "--model", &model, "--prompt", "th", "--text", &text]));
    assert_eq!(scored["profile"]["total"], decoded["information"]);

    let entropy = json(&infoband(&["entropy", "--model", &model, "--prompt", "the cat sat on the ma", "--samples", "50", "--exact"]));
    assert_eq!(entropy["estimate"]["samples"], 50);
    assert!(entropy["exact"]["entropy"].as_f64().unwrap() >= 0.0);

    let typical = json(&infoband(&["typical", "--coin", "0.6", "--length", "10", "--epsilon", "0.5"]));
    assert_eq!(typical["member_count"], 582);
    let per_symbol = json(&infoband(&["typical", "--coin", "0.6", "--length", "10", "--epsilon-per-symbol", "0.05"]));
    assert_eq!(per_symbol["member_count"], 582);
}

#[test]
fn t_test_from_lists_and_files() {
    let out = json(&infoband(&["test", "--a", "1,2,3,4,5", "--b", "2,4,6", "--alternative", "two-sided"]));
    assert!((out["t"].as_f64().unwrap() + 0.738549).abs() < 1e-6);
    assert!((out["dof"].as_f64().unwrap() - 3.532847).abs() < 1e-6);
    assert_eq!(out["reject"], false);

    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    std::fs::write(&a, "5.1\n4.9\n6.2\n5.8\n6.0\n").unwrap();
    let arg = format!("@{}", a.display());
    let paired = json(&infoband(&["test", "--a", &arg, "--b", "4.8 4.7 5.9 5.9 5.2", "--paired"]));
    assert_eq!(paired["paired"], true);
    assert_eq!(paired["dof"], 4.0);
}

#[test]
fn analyze_then_join_ratings() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let bundle = dir.path().join("csv");
    let out = infoband(&[
        "analyze",
        "--config",
        data("mini.cfg").to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
        "--csv",
        bundle.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(bundle.join("deviations.csv").exists());

    let parsed: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let mut csv = String::from("context_id,system,criterion,rater_id,score\n");
    for ctx in parsed["contexts"].as_array().unwrap() {
        for o in ctx["outputs"].as_array().unwrap() {
            let score = if o["system"] == "reference" { 7 } else { 1 };
            csv.push_str(&format!("{},{},overall,r1,{score}\n", ctx["id"].as_str().unwrap(), o["system"].as_str().unwrap()));
        }
    }
    let ratings = dir.path().join("ratings.csv");
    std::fs::write(&ratings, csv).unwrap();
    let joined = dir.path().join("joined.json");
    let out = infoband(&[
        "join-ratings",
        "--report",
        report.to_str().unwrap(),
        "--ratings",
        ratings.to_str().unwrap(),
        "--out",
        joined.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let joined: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&joined).unwrap()).unwrap();
    assert_eq!(joined["ratings"]["reference_rank1_proportion"], 1.0);
    assert_eq!(joined["contexts"], parsed["contexts"]);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(infoband(&[]).status.code(), Some(1));
    assert_eq!(infoband(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(infoband(&["train"]).status.code(), Some(1));
    assert_eq!(infoband(&["test", "--a", "1,2,x", "--b", "1,2"]).status.code(), Some(1));
    assert_eq!(infoband(&["typical", "--coin", "0.6", "--length", "4"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let model = trained(dir.path());
    assert_eq!(infoband(&["decode", "--model", &model, "--strategy", "telepathy"]).status.code(), Some(1));
}

#[test]
fn help_and_version_exit_with_zero() {
    assert_eq!(infoband(&["--help"]).status.code(), Some(0));
    assert_eq!(infoband(&["--version"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    let out = infoband(&["train", "--corpus", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.txt"));

    let model = trained(dir.path());
    let out = infoband(&["score", "--model", &model, "--text", "QQQ"]);
    assert_eq!(out.status.code(), Some(2));

    // Identical samples have no variance.
    assert_eq!(infoband(&["test", "--a", "1,1,1", "--b", "1,1,1"]).status.code(), Some(2));

    let report = dir.path().join("report.json");
    std::fs::copy(data("mini_report.json"), &report).unwrap();
    let ratings = dir.path().join("ratings.csv");
    std::fs::write(&ratings, "context_id,system,criterion,rater_id,score\nc9999,greedy,overall,r1,3\n").unwrap();
    let out = infoband(&["join-ratings", "--report", report.to_str().unwrap(), "--ratings", ratings.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(&ratings, "context_id,system,criterion,rater_id,score\nc0000,greedy,overall,r1,9\n").unwrap();
    let out = infoband(&["join-ratings", "--report", report.to_str().unwrap(), "--ratings", ratings.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ratings.csv:2:"));
}
