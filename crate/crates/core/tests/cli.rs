use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use blie::cli::read_results;
use blie::RunTrace;

const BLIE: &str = env!("CARGO_BIN_EXE_blie");
const ECHO: &str = env!("CARGO_BIN_EXE_blie-echo-evaluator");

fn blie(args: &[&str]) -> Output {
    Command::new(BLIE).args(args).env("BLIE_WORKERS", "2").output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: serde_json::Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_vec_pretty(&body).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_results_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(
        dir.path(),
        "run.json",
        serde_json::json!({
            "algorithm": {"name": "blie"},
            "instance": {"kind": "toy", "variant": "mu1", "d": 2, "sigma": 0.1},
            "budget": 65536,
            "seed": 5,
            "replicates": 2,
            "output": out,
        }),
    );
    let output = blie(&["run", "--config", &config]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));

    let rows = read_results(&out.join("results.csv")).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].seed, 5);
    assert_eq!(rows[1].seed, 6);
    for row in &rows {
        assert!(row.total_spent <= 65536);
        let trace: RunTrace =
            serde_json::from_slice(&fs::read(out.join(format!("trace-{}.json", row.run_id))).unwrap()).unwrap();
        assert_eq!(trace.total_spent, row.total_spent);
        assert_eq!(trace.simple_regret, row.simple_regret);
    }

    // A rerun reproduces every column except wall time.
    let again = blie(&["run", "--config", &config]);
    assert!(again.status.success());
    let rerun = read_results(&out.join("results.csv")).unwrap();
    for (a, b) in rows.iter().zip(&rerun) {
        assert_eq!(
            blie::cli::ResultRow { wall_time_ms: 0, ..a.clone() },
            blie::cli::ResultRow { wall_time_ms: 0, ..b.clone() }
        );
    }
}

#[test]
fn run_against_external_evaluator() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(
        dir.path(),
        "ext.json",
        serde_json::json!({
            "algorithm": {"name": "blie", "alpha": 0.5},
            "evaluator": {"command": [ECHO], "dim": 2},
            "budget": 4096,
            "output": out,
        }),
    );
    let output = blie(&["run", "--config", &config]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let rows = read_results(&out.join("results.csv")).unwrap();
    assert_eq!(rows[0].instance, "external");
    assert!(rows[0].simple_regret.is_none());
}

#[test]
fn conflicting_objectives_are_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "both.json",
        serde_json::json!({
            "algorithm": {"name": "blie"},
            "instance": {"kind": "toy", "variant": "mu1", "d": 2},
            "evaluator": {"command": [ECHO], "dim": 2},
            "budget": 4096,
            "output": dir.path().join("out"),
        }),
    );
    let output = blie(&["run", "--config", &config]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_config_error() {
    assert_eq!(blie(&["run", "--config", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn too_small_budget_is_a_run_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "small.json",
        serde_json::json!({
            "algorithm": {"name": "blie"},
            "instance": {"kind": "toy", "variant": "mu1", "d": 3},
            "budget": 10,
            "output": dir.path().join("out"),
        }),
    );
    let output = blie(&["run", "--config", &config]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("budget too small"));
}

#[test]
fn zoom_prints_worked_example() {
    let output = blie(&["zoom", "--instance", r#"{"kind":"linear","d":1}"#, "--r", "2^-4..2^-8"]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8(output.stdout).unwrap();
    let json_line = stdout.lines().last().unwrap();
    let report: serde_json::Value = serde_json::from_str(json_line).unwrap();
    let rows = report["stats"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r["n_r"] == 16));
    assert_eq!(report["stats"]["fitted_d_z"], 0.0);
    assert_eq!(report["stats"]["fitted_c_z"], 16.0);
}

#[test]
fn zoom_rejects_bad_scales() {
    let output = blie(&["zoom", "--instance", r#"{"kind":"linear","d":1}"#, "--r", "0.3"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn bench_schedules_suite_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    let output = blie(&[
        "bench",
        "--suite",
        "schedules",
        "--t-grid",
        "2^10,2^12",
        "--replicates",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["failed_runs"], 0);
    assert!(!summary["schedule_lengths"].as_array().unwrap().is_empty());
    assert_eq!(read_results(&out.join("results.csv")).unwrap().len(), 2 * 2 * 2);
}

#[test]
fn bench_rejects_unknown_suite() {
    assert_eq!(blie(&["bench", "--suite", "nope"]).status.code(), Some(2));
}
