//! Exit codes and report files of the `ksmild` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ksmild(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksmild")).args(args).arg("--out").arg(out).output().unwrap()
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("scenario.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn gronwall_scenario(extra: &str) -> String {
    format!(
        r#"{{
  "schema": 1,
  "name": "gronwall_only",
  "domain": {{ "lengths": ["pi", "pi"], "resolution": [16, 16] }},
  "solver": {{ "t_end": 5 }},
  "experiments": [{{ "kind": "gronwall"{extra} }}]
}}"#
    )
}

#[test]
fn version_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = ksmild(&["version"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ksmild "));
}

#[test]
fn missing_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = ksmild(&["run", "/nonexistent/scenario.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_arguments_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ksmild(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(ksmild(&["run", "x.json", "--strict", "--warn"], dir.path()).status.code(), Some(2));
}

#[test]
fn unknown_key_is_reported_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let text = gronwall_scenario("").replace(r#""t_end": 5"#, r#""t_end": 5, "stepsize": 0.1"#);
    let config = write_config(dir.path(), &text);
    let out = ksmild(&["run", config.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("solver.stepsize"), "{stderr}");
}

#[test]
fn wrong_schema_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &gronwall_scenario("").replace(r#""schema": 1"#, r#""schema": 2"#));
    assert_eq!(ksmild(&["run", config.to_str().unwrap()], dir.path()).status.code(), Some(2));
}

#[test]
fn gronwall_rate_above_gap_fails_gate() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &gronwall_scenario(r#", "sigmas": [0.5, 1.5]"#));
    let out = ksmild(&["run", config.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gronwall_only_run_passes_and_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &gronwall_scenario(""));
    let out = ksmild(&["run", config.to_str().unwrap(), "--threads", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = dir.path().join("gronwall_only");
    for file in ["gronwall_report.json", "gronwall.csv", "summary.json"] {
        assert!(report.join(file).is_file(), "{file}");
    }
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(report.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema"], 1);
    assert_eq!(summary["pass"], true);
}

#[test]
fn linear_example_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = ksmild(&["run", example("linear_ap.json").to_str().unwrap(), "--seed", "7"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = dir.path().join("linear_ap");
    for file in ["estimate_report.json", "solve_report.json", "trajectory.csv", "aap_report.json", "summary.json"] {
        assert!(report.join(file).is_file(), "{file}");
    }
    let csv = std::fs::read_to_string(report.join("trajectory.csv")).unwrap();
    let first_row = csv.lines().nth(1).unwrap();
    // Every float carries 17 significant digits.
    assert!(first_row.split(',').all(|f| f.split('e').next().unwrap().trim_start_matches('-').len() == 18));
}

#[test]
fn verify_runs_only_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let out = ksmild(&["verify", example("linear_ap.json").to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = dir.path().join("linear_ap");
    assert!(report.join("estimate_report.json").is_file());
    assert!(!report.join("trajectory.csv").exists());
}
