use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn usimul(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_usimul")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = usimul(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

/// A pool, a test set and weak data in a fresh directory.
fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &["synth", "--n", "300", "--seed", "1", "--out", "pool.csv"]);
    ok(p, &["synth", "--n", "100", "--seed", "2", "--out", "test.csv"]);
    ok(p, &["make-weak", "--in", "pool.csv", "--n-us", "100", "--n-u", "200", "--out-dir", "weak"]);
    dir
}

fn train_args<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["train", "--us", "weak/triplets.jsonl", "--u", "weak/unlabeled.jsonl", "--pi", "0.4"];
    v.extend_from_slice(extra);
    v
}

#[test]
fn synth_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--n", "100", "--dim", "2", "--out", "a.csv"]);
    let text = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(text.lines().count(), 101);
    assert_eq!(text.lines().next(), Some("y,f1,f2"));
    assert!(dir.path().join("a.csv.manifest.json").exists());
}

#[test]
fn synth_zero_sigma_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = usimul(dir.path(), &["synth", "--n", "10", "--sigma", "0", "--out", "a.csv"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));
}

#[test]
fn make_weak_outputs_are_label_free() {
    let dir = workspace();
    let triplets = fs::read_to_string(dir.path().join("weak/triplets.jsonl")).unwrap();
    let unlabeled = fs::read_to_string(dir.path().join("weak/unlabeled.jsonl")).unwrap();
    assert_eq!(triplets.lines().count(), 100);
    assert_eq!(unlabeled.lines().count(), 200);
    assert!(!triplets.contains("\"y\"") && !unlabeled.contains("\"y\""));
    assert!(triplets.lines().all(|l| l.starts_with("{\"anchor\":")));
}

#[test]
fn samplers_produce_different_triplets() {
    let dir = workspace();
    let p = dir.path();
    ok(p, &["make-weak", "--in", "pool.csv", "--n-us", "50", "--n-u", "5", "--sampler", "paper-case", "--out-dir", "pc"]);
    ok(p, &["make-weak", "--in", "pool.csv", "--n-us", "50", "--n-u", "5", "--sampler", "rejection", "--out-dir", "rj"]);
    assert_ne!(fs::read(p.join("pc/triplets.jsonl")).unwrap(), fs::read(p.join("rj/triplets.jsonl")).unwrap());
}

#[test]
fn single_class_pool_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("one.csv"), "y,f1\n+1,0.5\n+1,0.25\n").unwrap();
    let out = usimul(dir.path(), &["make-weak", "--in", "one.csv", "--n-us", "3", "--n-u", "3", "--out-dir", "w"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("only one class"));
}

#[test]
fn degenerate_prior_names_the_assumption() {
    let dir = workspace();
    let mut args = train_args(&["--out", "m.json"]);
    args[6] = "0.5";
    let out = usimul(dir.path(), &args);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("pi_plus != 1/2"));
    assert!(!dir.path().join("m.json").exists());
}

#[test]
fn zero_epochs_writes_the_initial_model() {
    let dir = workspace();
    let p = dir.path();
    ok(p, &train_args(&["--epochs", "0", "--seed", "3", "--out", "a.json"]));
    ok(p, &train_args(&["--epochs", "0", "--seed", "3", "--lr", "0.5", "--out", "b.json"]));
    let params = |f: &str| {
        let v: serde_json::Value = serde_json::from_slice(&fs::read(p.join(f)).unwrap()).unwrap();
        v["params"].clone()
    };
    assert_eq!(params("a.json"), params("b.json"));
    let log = fs::read_to_string(p.join("a.json.log.csv")).unwrap();
    assert_eq!(log.lines().count(), 1);
}

#[test]
fn train_then_eval_reports_accuracy() {
    let dir = workspace();
    let p = dir.path();
    let out = ok(p, &train_args(&["--batch", "16", "--test", "test.csv", "--out", "m.json", "--log", "log.csv"]));
    let trained: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let out = ok(p, &["eval", "--model", "m.json", "--test", "test.csv"]);
    let eval: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let acc = eval["accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
    assert_eq!(trained["test_accuracy"].as_f64(), Some(acc));
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(p.join("m.json")).unwrap()).unwrap();
    assert_eq!(doc["config"]["batch_size"], 16);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(p.join("m.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "train");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 3);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn eval_perfect_model_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("perfect.json"), r#"{"kind":"linear","dim":1,"params":[1.0,0.0]}"#).unwrap();
    fs::write(p.join("test.csv"), "y,f1\n+1,2.0\n-1,-1.5\n+1,0.5\n").unwrap();
    let out = ok(p, &["eval", "--model", "perfect.json", "--test", "test.csv"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["accuracy"], 1.0);

    fs::write(p.join("empty.csv"), "y,f1\n").unwrap();
    assert_ne!(code(&usimul(p, &["eval", "--model", "perfect.json", "--test", "empty.csv"])), 0);

    fs::write(p.join("wide.csv"), "y,f1,f2\n+1,2.0,1.0\n").unwrap();
    let out = usimul(p, &["eval", "--model", "perfect.json", "--test", "wide.csv"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("shape"));

    assert_eq!(code(&usimul(p, &["eval", "--model", "missing.json", "--test", "test.csv"])), 3);
}

#[test]
fn verify_thetas_passes_and_unknown_suite_is_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["verify", "--suite", "thetas", "--out", "r.json"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true);
    assert!(dir.path().join("r.json.manifest.json").exists());
    assert_eq!(code(&usimul(dir.path(), &["verify", "--suite", "nope"])), 2);
}

#[test]
fn unknown_flag_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&usimul(dir.path(), &["synth", "--bogus"])), 2);
    assert_eq!(code(&usimul(dir.path(), &["nonsense"])), 2);
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("c.conf"), "# synth settings\nn = 40\nout = a.csv\nseed=5\n").unwrap();
    ok(p, &["--config", "c.conf", "synth"]);
    assert_eq!(fs::read_to_string(p.join("a.csv")).unwrap().lines().count(), 41);
    ok(p, &["synth", "--config", "c.conf", "--n", "10"]);
    assert_eq!(fs::read_to_string(p.join("a.csv")).unwrap().lines().count(), 11);
    fs::write(p.join("bad.conf"), "n 40\n").unwrap();
    assert_eq!(code(&usimul(p, &["synth", "--config", "bad.conf"])), 4);
    assert_eq!(code(&usimul(p, &["synth", "--config", "absent.conf"])), 3);
}

#[test]
fn sweeps_write_all_formats_and_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let args = [
        "sweep", "--kind", "prior", "--given", "0.35,0.4,0.45,0.5", "--seeds", "0,1", "--n-us", "60", "--n-u", "60",
        "--n-test", "50", "--epochs", "2", "--batch", "16", "--out", "s/prior",
    ];
    ok(p, &args);
    let csv = fs::read_to_string(p.join("s/prior.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4, "{csv}");
    let json: serde_json::Value = serde_json::from_slice(&fs::read(p.join("s/prior.json")).unwrap()).unwrap();
    assert_eq!(json["errors"][0]["setting"], "0.5");
    assert!(p.join("s/prior.dat").exists() && p.join("s/prior.manifest.json").exists());
    ok(p, &args);
    assert_eq!(fs::read_to_string(p.join("s/prior.csv")).unwrap(), csv);
}

#[test]
fn fraction_sweep_reports_every_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        dir.path(),
        &[
            "sweep", "--kind", "fraction", "--fractions", "0.1,0.5,1.0", "--n-us", "200", "--n-u", "200",
            "--n-test", "50", "--epochs", "1", "--batch", "16", "--out", "f",
        ],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.split(',').nth(3) == Some("5")));
}
