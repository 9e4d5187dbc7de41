use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn model(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("models").join(name)
}

/// Runs the CLI in-process and returns (exit code, stdout, stderr).
fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = vanc::cli::run(std::iter::once("vanc").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn boat() -> String {
    model("boat.toml").display().to_string()
}

#[test]
fn boat_passes_the_check() {
    let (code, out, _) = run(&["check", &boat(), "--point", "0,0,0", "--point", "1,-2,2.5"]);
    assert_eq!(code, 0);
    let record = json(&out);
    assert_eq!(record["all_ok"], Value::Bool(true));
    assert_eq!(record["points"][0]["cond"].as_f64(), Some(1.0));
    assert_eq!(record["points"][0]["P"][0][0].as_f64(), Some(1.0));
}

#[test]
fn default_grid_covers_every_coordinate() {
    let (code, out, _) = run(&["check", &boat()]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["points"].as_array().unwrap().len(), 27);
}

#[test]
fn degenerate_model_fails_the_check() {
    let path = model("degenerate.toml").display().to_string();
    let (code, out, _) = run(&["check", &path, "--grid", "-1,1,2"]);
    assert_eq!(code, 1);
    let record = json(&out);
    assert_eq!(record["violations"].as_u64(), Some(4));
    assert_eq!(record["points"][0]["transversal"], Value::Bool(false));
    assert_eq!(record["points"][0]["P"][0][0].as_f64(), Some(0.0));
}

#[test]
fn malformed_expression_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(model("boat.toml"))
        .unwrap()
        .replace(r#"mu = [["sin(theta)""#, r#"mu = [["sin(theta""#);
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, text).unwrap();
    let (code, _, err) = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("constraint.mu[0][0]"), "{err}");
    assert!(err.contains("at byte 9"), "{err}");
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(model("boat.toml")).unwrap().replace("n = 3", "n = 3\nmass = 2");
    let path = dir.path().join("extra.toml");
    std::fs::write(&path, text).unwrap();
    let (code, _, err) = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("mass"), "{err}");
}

#[test]
fn bad_settings_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let out = out.to_str().unwrap();
    let base = ["simulate", "--q0", "0,0,0", "--qdot0", "0,1,0", "--out", out];
    for extra in [["--t-end", "1", "--dt", "0"], ["--t-end", "-1", "--dt", "0.1"], ["--t-end", "1", "--dt", "nan"]] {
        let mut args = vec![boat()];
        args.extend(base.iter().map(|s| s.to_string()));
        args.extend(extra.iter().map(|s| s.to_string()));
        args.swap(0, 1);
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, _, err) = run(&refs);
        assert_eq!(code, 2, "{extra:?}: {err}");
    }
    let (code, _, _) = run(&["simulate", &boat(), "--q0", "0,0", "--qdot0", "0,1,0", "--t-end", "1", "--dt", "0.1", "--out", out]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["check", "/nonexistent/model.toml"]);
    assert_eq!(code, 2);
}

fn simulate(extra: &[&str], q0: &str, qdot0: &str) -> (i32, Value, String) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let b = boat();
    let mut args = vec![
        "simulate", &b, "--q0", q0, "--qdot0", qdot0, "--t-end", "10", "--dt", "1e-3", "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let (code, stdout, err) = run(&args);
    assert!(err.is_empty(), "{err}");
    let csv = std::fs::read_to_string(&out).unwrap();
    (code, json(&stdout), csv)
}

#[test]
fn projected_simulation_stays_on_the_constraint() {
    let (code, summary, csv) = simulate(&["--project", "--sample-every", "100", "--wrap-angles"], "0.3,-0.2,0.4", "0.5,0.1,0.8");
    assert_eq!(code, 0);
    assert!(summary["max_drift"].as_f64().unwrap() <= 1e-8);
    assert_eq!(summary["samples"].as_u64(), Some(101));
    assert!((summary["t_final"].as_f64().unwrap() - 10.0).abs() < 1e-9);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x,y,theta,xd,yd,thetad,tau1,phi1"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 101);
    for r in &rows {
        assert!(r[3] > -std::f64::consts::PI && r[3] <= std::f64::consts::PI);
        assert!(r[8].abs() <= 1e-8);
    }
}

#[test]
fn off_constraint_simulation_conserves_phi() {
    // θ = 0 so φ = −ẏ + cos(x); starting with ẏ = cos(0.3) − 0.7 gives φ = 0.7
    let yd = 0.3f64.cos() - 0.7;
    let qdot0 = format!("1.0,{yd:.17},0.2");
    let (code, summary, _) = simulate(&["--sample-every", "50"], "0.3,-0.2,0", &qdot0);
    assert_eq!(code, 0);
    assert!((summary["phi0"][0].as_f64().unwrap() - 0.7).abs() < 1e-12);
    assert!(summary["drift_report"][0].as_f64().unwrap() <= 1e-8);
}

#[test]
fn csv_values_carry_seventeen_significant_digits() {
    let (_, _, csv) = simulate(&["--sample-every", "5000"], "0.1,0.2,0.3", "0.4,0.5,0.6");
    let row = csv.lines().nth(1).unwrap();
    for field in row.split(',') {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{field}");
    }
    // values round-trip exactly
    assert_eq!(row.split(',').nth(1).unwrap().parse::<f64>().unwrap(), 0.1);
}

#[test]
fn control_at_reports_the_feedback() {
    let (code, out, _) = run(&["control-at", &boat(), "--q", "0,0,0", "--qdot", "1,1,1"]);
    assert_eq!(code, 0);
    let record = json(&out);
    assert!((record["tau"][0].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert_eq!(record["P"][0][0].as_f64(), Some(1.0));

    let (code, out, _) = run(&["control-at", &boat(), "--q", "0,0,0", "--qdot", "1,0,0"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["tau"][0].as_f64(), Some(0.0));
}

#[test]
fn control_at_refuses_the_degenerate_model() {
    let path = model("degenerate.toml").display().to_string();
    let (code, out, _) = run(&["control-at", &path, "--q", "0,0", "--qdot", "1,0"]);
    assert_eq!(code, 1);
    let record = json(&out);
    assert_eq!(record["error"].as_str(), Some("transversality violation"));
    assert_eq!(record["det"].as_f64(), Some(0.0));
}

#[test]
fn binary_uses_the_same_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_vanc");
    let ok = Command::new(exe).args(["check", &boat()]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(json(&String::from_utf8_lossy(&ok.stdout))["all_ok"].as_bool().unwrap());
    let degenerate = model("degenerate.toml");
    let bad = Command::new(exe).arg("check").arg(&degenerate).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let usage = Command::new(exe).args(["simulate"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    let help = Command::new(exe).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
