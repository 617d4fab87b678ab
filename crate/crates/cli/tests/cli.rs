use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn faultsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_faultsense"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = faultsense(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small synthetic dataset: 30 recordings of 2000 samples.
fn small_data(tmp: &TempDir) -> PathBuf {
    let dir = tmp.path().join("data");
    ok(&[
        "generate",
        "--n-per-class",
        "10",
        "--len",
        "2000",
        "--seed",
        "3",
        "--out",
        s(&dir),
        "--quiet",
    ]);
    dir.join("manifest.csv")
}

fn train(manifest: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "train",
        "--data",
        s(manifest),
        "--out",
        s(out),
        "--segment-len",
        "2000",
        "--quiet",
    ];
    args.extend_from_slice(extra);
    ok(&args)
}

fn accuracy(run: &Path) -> f64 {
    let text = fs::read_to_string(run.join("report.json")).unwrap();
    let line = text.lines().find(|l| l.contains("\"accuracy\"")).unwrap();
    line.trim()
        .trim_start_matches("\"accuracy\": ")
        .trim_end_matches(',')
        .parse()
        .unwrap()
}

#[test]
fn generate_writes_files_deterministically() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        ok(&[
            "generate",
            "--n-per-class",
            "200",
            "--len",
            "10000",
            "--seed",
            "7",
            "--out",
            s(dir),
            "--quiet",
        ]);
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(
        names.iter().filter(|n| n.to_string_lossy().ends_with(".f32")).count(),
        600
    );
    assert!(a.join("manifest.csv").is_file());
    for n in &names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n:?}");
    }

    let run = tmp.path().join("m5");
    ok(&[
        "train",
        "--model",
        "5",
        "--data",
        s(&a.join("manifest.csv")),
        "--seed",
        "1",
        "--out",
        s(&run),
        "--quiet",
    ]);
    assert!(accuracy(&run) >= 0.90, "{}", accuracy(&run));
}

#[test]
fn generate_rejects_zero_recordings() {
    let tmp = TempDir::new().unwrap();
    let out = faultsense(&["generate", "--n-per-class", "0", "--out", s(tmp.path())]);
    assert_eq!(code(&out), 2);
}

#[test]
fn model_out_of_range_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let manifest = small_data(&tmp);
    let out = faultsense(&["train", "--model", "9", "--data", s(&manifest), "--out", s(tmp.path())]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("1-8"));
}

#[test]
fn unparseable_flag_is_a_usage_error() {
    assert_eq!(code(&faultsense(&["train", "--seed", "many"])), 2);
}

#[test]
fn missing_manifest_is_a_runtime_error() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nope.csv");
    let out = faultsense(&["train", "--model", "5", "--data", s(&missing), "--out", s(tmp.path())]);
    assert_eq!(code(&out), 1);
}

#[test]
fn reward_curve_presence_follows_model() {
    let tmp = TempDir::new().unwrap();
    let manifest = small_data(&tmp);
    let m8 = tmp.path().join("m8");
    let m1 = tmp.path().join("m1");
    train(&manifest, &m8, &["--model", "8", "--timesteps", "100"]);
    train(&manifest, &m1, &["--model", "1", "--epochs", "1"]);
    for f in [
        "checkpoint.bin",
        "report.json",
        "confusion.csv",
        "reward_curve.csv",
        "run.conf",
    ] {
        assert!(m8.join(f).is_file(), "{f}");
    }
    assert!(!m1.join("reward_curve.csv").exists());
    assert!(m1.join("loss_log.csv").is_file());
    let curve = fs::read_to_string(m8.join("reward_curve.csv")).unwrap();
    assert!(curve.starts_with("episode,cumulative_reward,epsilon\n"));
    // 24 training recordings, one feature vector each: 4 full episodes.
    assert_eq!(curve.lines().count(), 5);
}

#[test]
fn train_summary_line() {
    let tmp = TempDir::new().unwrap();
    let manifest = small_data(&tmp);
    let run = tmp.path().join("run");
    let out = ok(&[
        "train",
        "--model",
        "6",
        "--data",
        s(&manifest),
        "--out",
        s(&run),
        "--segment-len",
        "2000",
        "--epochs",
        "2",
    ]);
    let line = String::from_utf8_lossy(&out.stdout);
    assert!(
        line.contains("model 6") && line.contains("accuracy") && line.contains("macro-F1"),
        "{line}"
    );
}

#[test]
fn repeated_train_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let manifest = small_data(&tmp);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        train(&manifest, dir, &["--model", "7", "--epochs", "3", "--seed", "5"]);
    }
    for f in ["report.json", "checkpoint.bin"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_precedence_flag_over_file_over_default() {
    let tmp = TempDir::new().unwrap();
    let manifest = small_data(&tmp);
    let conf = tmp.path().join("exp.conf");
    fs::write(&conf, "model_id = 5\nepochs = 3\nseed = 4\nsegment_len = 1000\n").unwrap();
    let run = tmp.path().join("run");
    ok(&[
        "--config",
        s(&conf),
        "train",
        "--data",
        s(&manifest),
        "--seed",
        "9",
        "--out",
        s(&run),
        "--quiet",
    ]);
    let stored = fs::read_to_string(run.join("run.conf")).unwrap();
    assert!(stored.contains("seed = 9\n"), "{stored}");
    assert!(stored.contains("epochs = 3\n"));
    assert!(stored.contains("segment_len = 1000\n"));
    assert!(stored.contains("buffer_capacity = 10000\n"));
}

#[test]
fn evaluate_reproduces_stored_metrics() {
    let tmp = TempDir::new().unwrap();
    let manifest = small_data(&tmp);
    let run = tmp.path().join("m7");
    train(&manifest, &run, &["--model", "7", "--epochs", "3", "--seed", "2"]);
    let before = fs::read(run.join("checkpoint.bin")).unwrap();
    let eval_dir = tmp.path().join("eval");
    ok(&["evaluate", "--run", s(&run), "--out", s(&eval_dir), "--quiet"]);
    assert_eq!(accuracy(&eval_dir), accuracy(&run));
    let confusion = |p: &Path| {
        let t = fs::read_to_string(p.join("report.json")).unwrap();
        t.lines().find(|l| l.contains("\"confusion\"")).unwrap().to_string()
    };
    assert_eq!(confusion(&eval_dir), confusion(&run));
    assert_eq!(fs::read(run.join("checkpoint.bin")).unwrap(), before);
}

#[test]
fn evaluate_stats_checkpoint_on_windows_is_shape_mismatch() {
    let tmp = TempDir::new().unwrap();
    let manifest = small_data(&tmp);
    let run = tmp.path().join("m5");
    train(&manifest, &run, &["--model", "5", "--epochs", "1"]);
    let out = faultsense(&["evaluate", "--run", s(&run), "--model", "1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("inputs"));
}

#[test]
fn empty_test_split_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("data");
    ok(&[
        "generate",
        "--n-per-class",
        "1",
        "--len",
        "2000",
        "--out",
        s(&dir),
        "--quiet",
    ]);
    let out = faultsense(&[
        "train",
        "--model",
        "5",
        "--data",
        s(&dir.join("manifest.csv")),
        "--out",
        s(&tmp.path().join("r")),
        "--segment-len",
        "2000",
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn report_tables_runs_by_model_id() {
    let tmp = TempDir::new().unwrap();
    let manifest = small_data(&tmp);
    let runs: Vec<PathBuf> = [("6", "1"), ("5", "1"), ("5", "2")]
        .iter()
        .map(|(m, seed)| {
            let dir = tmp.path().join(format!("m{m}s{seed}"));
            train(&manifest, &dir, &["--model", m, "--epochs", "1", "--seed", seed]);
            dir
        })
        .collect();
    let table_dir = tmp.path().join("table");
    let out = ok(&["report", s(&runs[0]), s(&runs[1]), s(&runs[2]), "--out", s(&table_dir)]);
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5, "{text}");
    assert!(lines[0].contains("Accuracy (%)") && lines[0].contains("Training time"));
    assert!(lines[2].starts_with("Model 5 (seed 1)"));
    assert!(lines[3].starts_with("Model 5 (seed 2)"));
    assert!(lines[4].starts_with("Model 6"));
    assert_eq!(
        fs::read_to_string(table_dir.join("comparison.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );

    let single = ok(&["report", s(&runs[1])]);
    assert_eq!(String::from_utf8_lossy(&single.stdout).lines().count(), 3);
}

#[test]
fn report_without_report_json_fails() {
    let tmp = TempDir::new().unwrap();
    let out = faultsense(&["report", s(tmp.path())]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("report"));
}
