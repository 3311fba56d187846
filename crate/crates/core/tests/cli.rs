mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ami-ids"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn fixture() -> String {
    common::fixture_path().display().to_string()
}

/// Small, fast settings over the bundled fixture.
fn write_config(dir: &Path) -> String {
    let text = format!(
        r#"seed = 7
output_dir = "out"

[data]
inputs = ["{}"]

[model]
hidden_layers = 1
nodes = 6
epochs = 3

[cv]
folds = 3

[baselines]
svm_train_cap = 200

[baselines.forest]
trees = 5

[compare.mlp]
hidden_layers = 1
nodes = 5
epochs = 3

[output]
timing = false
"#,
        fixture()
    );
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn csv_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_owned).collect()
}

#[test]
fn help_lists_every_subcommand() {
    let tmp = TempDir::new().unwrap();
    let out = ok(tmp.path(), &["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for cmd in ["preprocess", "train", "evaluate", "sweep", "compare", "monitor"] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
    for flag in ["--config", "--seed", "--output-dir", "--no-timing", "--verbose"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn usage_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path());
    assert_eq!(run(tmp.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(tmp.path(), &["train", "--activation", "softplus"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(tmp.path(), &["-c", &cfg, "sweep", "--param", "epochs", "--grid", "0,2"])
            .status
            .code(),
        Some(2)
    );
    // missing input file
    assert_eq!(
        run(tmp.path(), &["-c", &cfg, "preprocess", "-i", "nowhere.txt"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(tmp.path(), &["-c", "no_such.toml", "compare"]).status.code(),
        Some(2)
    );
    fs::write(tmp.path().join("bad.toml"), "[cv]\nfolds = 10\nbogus = 1\n").unwrap();
    assert_eq!(run(tmp.path(), &["-c", "bad.toml", "compare"]).status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path());
    fs::write(tmp.path().join("broken.txt"), "0,tcp,http\n").unwrap();
    assert_eq!(
        run(tmp.path(), &["-c", &cfg, "preprocess", "-i", "broken.txt"])
            .status
            .code(),
        Some(1)
    );
    fs::write(tmp.path().join("model.json"), "{\"schema_version\": 1}").unwrap();
    let out = run(
        tmp.path(),
        &[
            "-c",
            &cfg,
            "monitor",
            "--model-file",
            "model.json",
            "--input",
            &fixture(),
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn preprocess_then_train_then_score() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path());
    ok(tmp.path(), &["-c", &cfg, "preprocess"]);
    let out = tmp.path().join("out");
    for f in [
        "encoded.csv",
        "feature_stats.csv",
        "preprocess_tables.json",
        "preprocess_summary.txt",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    assert_eq!(csv_rows(&out.join("encoded.csv")).len(), 1001);

    ok(tmp.path(), &["-c", &cfg, "train", "--epochs", "4"]);
    assert!(out.join("model.json").is_file());
    assert_eq!(csv_rows(&out.join("train_trace.csv")).len(), 5);

    ok(tmp.path(), &["-c", &cfg, "evaluate", "--model-file", "out/model.json"]);
    assert!(out.join("evaluate_model.csv").is_file());
}

#[test]
fn evaluate_writes_fold_rows_and_mean() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path());
    ok(tmp.path(), &["-c", &cfg, "evaluate", "--algorithm", "naive-bayes"]);
    let rows = csv_rows(&tmp.path().join("out/evaluate_naive_bayes.csv"));
    // header, three folds, mean
    assert_eq!(rows.len(), 5, "{rows:?}");
}

#[test]
fn epoch_sweep_has_one_row_per_grid_point() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path());
    ok(
        tmp.path(),
        &[
            "-c",
            &cfg,
            "sweep",
            "--param",
            "epochs",
            "--grid",
            "2,10,50,100",
            "--folds",
            "2",
        ],
    );
    let rows = csv_rows(&tmp.path().join("out/sweep_epochs.csv"));
    assert_eq!(rows.len(), 5);
    let params: Vec<&str> = rows[1..].iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(params, ["2", "10", "50", "100"]);
}

#[test]
fn compare_is_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path());
    ok(tmp.path(), &["-c", &cfg, "compare"]);
    let first = fs::read(tmp.path().join("out/comparison.csv")).unwrap();
    ok(tmp.path(), &["-c", &cfg, "compare"]);
    let second = fs::read(tmp.path().join("out/comparison.csv")).unwrap();
    assert_eq!(first, second);
    let text = String::from_utf8(first).unwrap();
    let algorithms: Vec<&str> = text.lines().skip(1).map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(algorithms, ["mlp", "random_forest", "svm", "naive_bayes"]);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path());
    ok(
        tmp.path(),
        &[
            "-c",
            &cfg,
            "--seed",
            "1",
            "-o",
            "a",
            "evaluate",
            "--algorithm",
            "random-forest",
        ],
    );
    ok(
        tmp.path(),
        &[
            "-c",
            &cfg,
            "--seed",
            "2",
            "-o",
            "b",
            "evaluate",
            "--algorithm",
            "random-forest",
        ],
    );
    let a = fs::read(tmp.path().join("a/evaluate_random_forest.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/evaluate_random_forest.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn monitor_alert_log_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path());
    ok(tmp.path(), &["-c", &cfg, "train"]);
    let args = |alerts: &'static str| {
        vec![
            "-c".to_owned(),
            cfg.clone(),
            "monitor".into(),
            "--model-file".into(),
            "out/model.json".into(),
            "--input".into(),
            fixture(),
            "--alerts".into(),
            alerts.into(),
            "--frozen-clock".into(),
        ]
    };
    let a: Vec<String> = args("a.log");
    let b: Vec<String> = args("b.log");
    ok(tmp.path(), &a.iter().map(String::as_str).collect::<Vec<_>>());
    ok(tmp.path(), &b.iter().map(String::as_str).collect::<Vec<_>>());
    let a = fs::read_to_string(tmp.path().join("a.log")).unwrap();
    let b = fs::read_to_string(tmp.path().join("b.log")).unwrap();
    assert_eq!(a, b);
    assert!(!a.is_empty());
}

#[test]
fn every_subcommand_flag_has_help_text() {
    let tmp = TempDir::new().unwrap();
    for cmd in ["preprocess", "train", "evaluate", "sweep", "compare", "monitor"] {
        let text = String::from_utf8(ok(tmp.path(), &[cmd, "--help"]).stdout).unwrap();
        for line in text.lines().filter(|l| l.trim_start().starts_with('-')) {
            // clap's own `[default: ..]` and `[possible values: ..]` do not count
            let described = line
                .trim()
                .split("  ")
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .skip(1)
                .any(|p| !p.starts_with('['));
            assert!(described, "{cmd}: undocumented `{}`", line.trim());
        }
    }
}
