//! Harness behavior: exit codes, config validation with field paths,
//! captured failures, determinism of emitted reports, artifact files.

use std::process::Command;

use grassmannian_cli::scenario::{Experiment, Scenario};
use grassmannian_cli::{run_scenario, verify_suite, SuiteReport};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_grassmannian"))
}

fn write_config(dir: &std::path::Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn low_resolution_config_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bad.toml",
        r#"
            id = "too-coarse"
            experiment = "chart-transition"
            resolution = 8
        "#,
    );
    let output = bin()
        .args(["chart-transition", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{output:?}");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("resolution"), "stderr: {stderr}");
}

#[test]
fn mismatched_experiment_tag_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "mismatch.toml",
        r#"
            id = "wrong-tag"
            experiment = "transport"
            resolution = 64
        "#,
    );
    let output = bin()
        .args(["lift-path", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn passing_scenario_exits_zero_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "ok.toml",
        r#"
            id = "small-transition"
            experiment = "chart-transition"
            resolution = 64
            trials = 5

            [[curves]]
            role = "primary"
            generator = "circle"
            radius = 1.0

            [[curves]]
            role = "secondary"
            generator = "circle"
            radius = 1.0
            center = [0.05, 0.0]
        "#,
    );
    let out_dir = dir.path().join("out");
    let output = bin()
        .args(["chart-transition", "--json", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let report: serde_json::Value =
        serde_json::from_slice(&output.stdout).expect("stdout is the report JSON");
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    assert!(out_dir.join("report.json").exists());
    assert!(out_dir.join("small-transition_transition.csv").exists());
    // every numeric claim names its tolerance
    for check in report["scenarios"][0]["checks"].as_array().unwrap() {
        if check["value"].is_number() {
            assert!(check["tolerance"].is_number(), "check without tolerance: {check}");
        }
    }
}

#[test]
fn failing_scenario_exits_one_with_detail() {
    // sections near the tube radius fold the projection onto the far
    // offset chart; the failure must land in the report, not crash
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "fold.toml",
        r#"
            id = "constructed-failure"
            experiment = "chart-transition"
            resolution = 64
            trials = 3
            section_amplitude = 0.9

            [[curves]]
            role = "primary"
            generator = "circle"
            radius = 1.0

            [[curves]]
            role = "secondary"
            generator = "circle"
            radius = 1.0
            center = [0.45, 0.0]
        "#,
    );
    let output = bin()
        .args(["chart-transition", "--json", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1), "{output:?}");
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(false));
    let checks = report["scenarios"][0]["checks"].as_array().unwrap();
    assert!(
        checks.iter().any(|c| c["passed"] == serde_json::Value::Bool(false)),
        "per-scenario detail with the failed check is present"
    );
}

#[test]
fn seed_and_resolution_overrides_reach_the_report() {
    let output = bin()
        .args([
            "projection-diff",
            "--json",
            "--seed",
            "7",
            "--resolution",
            "64",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report["scenarios"][0]["seed"], 7);
    assert_eq!(report["scenarios"][0]["resolution"], 64);
}

#[test]
fn repeated_runs_emit_identical_bytes() {
    let run = || {
        bin()
            .args(["trivialize", "--json", "--seed", "42", "--resolution", "128"])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "reports must be byte-identical");
}

#[test]
fn empty_suite_passes() {
    let report: SuiteReport = verify_suite(&[], None);
    assert!(report.pass);
    assert!(report.scenarios.is_empty());
}

#[test]
fn library_scenarios_capture_module_errors() {
    // torus-knot generator on a flat ambient is a config-level mistake;
    // the runner reports it as a failed scenario, it does not crash
    let mut scenario = grassmannian_cli::default_scenario(Experiment::LiftPath, 1).unwrap();
    scenario.curves[0].generator = grassmannian_cli::scenario::CurveGenerator::TorusKnot {
        p: 2,
        q: 3,
    };
    scenario.resolution = 64;
    let report = run_scenario(&scenario, None);
    assert!(!report.pass);
}

#[test]
fn suite_config_roundtrips_through_toml() {
    let scenarios = grassmannian_cli::default_suite(42);
    let suite = grassmannian_cli::Suite {
        id: "default".into(),
        scenarios,
    };
    let text = toml::to_string(&suite).unwrap();
    let parsed = grassmannian_cli::Suite::from_toml(&text).unwrap();
    assert_eq!(parsed.scenarios.len(), suite.scenarios.len());
    let _: Vec<&Scenario> = parsed.scenarios.iter().collect();
}
