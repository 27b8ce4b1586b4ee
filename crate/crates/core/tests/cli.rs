//! End-to-end runs of the `lerayflow` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str], config: Option<&str>, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lerayflow"));
    cmd.current_dir(dir).args(args).arg("--out").arg(dir.join("out"));
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("LERAYFLOW_")) {
        cmd.env_remove(k);
    }
    if let Some(c) = config {
        let p = dir.join("cfg.json");
        std::fs::write(&p, c).unwrap();
        cmd.arg("--config").arg(p);
    }
    cmd.envs(env.iter().copied());
    cmd.output().unwrap()
}

fn report(dir: &Path, name: &str) -> Value {
    let s = std::fs::read_to_string(dir.join("out").join(name)).unwrap();
    serde_json::from_str(&s).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn zero_data_gives_a_zero_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"basis_radius": 2, "data": {"preset": "zero"}, "horizon": 0.5}"#;
    let o = run(tmp.path(), &["simulate"], Some(cfg), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rd = csv::Reader::from_path(tmp.path().join("out/trajectory.csv")).unwrap();
    let mut rows = 0;
    for rec in rd.deserialize::<std::collections::HashMap<String, f64>>() {
        let rec = rec.unwrap();
        for key in ["u_l2", "v_l2", "u_enstrophy", "v_enstrophy"] {
            assert_eq!(rec[key], 0.0, "{key}");
        }
        rows += 1;
    }
    assert!(rows > 1);
    let rep = report(tmp.path(), "simulate_report.json");
    assert_eq!(rep["status"]["kind"], "reached_horizon");
    assert_eq!(rep["final_time"], 0.5);
}

#[test]
fn single_mode_follows_heat_decay() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"basis_radius": 1.5, "data": {"preset": "single-mode"}, "nu": 0.3,
                  "formulation": "lifted", "stepper": {"rtol": 1e-10, "atol": 1e-12}}"#;
    let o = run(tmp.path(), &["simulate"], Some(cfg), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = report(tmp.path(), "simulate_report.json");
    let err = rep["closed_form_relative_error"].as_f64().unwrap();
    assert!(err < 1e-8, "{err}");
    assert_eq!(rep["formulation"], "lifted");
}

#[test]
fn verify_passes_and_catches_a_corrupted_tensor() {
    let tmp = tempfile::tempdir().unwrap();
    let base = r#"{"basis_radius": 2, "verify": {"gn_samples": 6, "oracle_modes": 4}}"#;
    let o = run(tmp.path(), &["verify"], Some(base), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = report(tmp.path(), "verify_report.json");
    assert!(rep["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));

    let o = run(tmp.path(), &["verify"], Some(base), &[("LERAYFLOW_VERIFY__CORRUPT_TENSOR", "true")]);
    assert_eq!(o.status.code(), Some(1));
    let rep = report(tmp.path(), "verify_report.json");
    let skew = rep["checks"].as_array().unwrap().iter().find(|c| c["name"] == "tensor_skewness").unwrap();
    assert_eq!(skew["pass"], false);
}

#[test]
fn zero_data_lift_check_is_degenerate() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"basis_radius": 2, "data": {"preset": "zero"}}"#;
    let o = run(tmp.path(), &["lift-check"], Some(cfg), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = report(tmp.path(), "lift_check_report.json");
    assert_eq!(rep["degenerate"], true);
    assert_eq!(rep["flatness_slope"], Value::Null);
}

#[test]
fn oracle_report_is_written() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["oracle", "--seed", "7"], None, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = report(tmp.path(), "oracle_report.json");
    assert_eq!(rep["pass"], true);
    assert_eq!(rep["config"]["seed"], 7);
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["simulate"], Some(r#"{"viscosity": 0.1}"#), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("viscosity"), "{}", stderr(&o));

    let o = run(tmp.path(), &["simulate"], None, &[("LERAYFLOW_NU", "-1")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nu"), "{}", stderr(&o));

    let o = run(tmp.path(), &["simulate"], Some("[1, 2]"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn environment_and_flags_reach_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let env = [("LERAYFLOW_NU", "0.05"), ("LERAYFLOW_HORIZON", "0.1"), ("LERAYFLOW_BASIS_RADIUS", "2")];
    let o = run(tmp.path(), &["simulate", "--fixed-step", "0.01", "--formulation", "lifted"], None, &env);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = report(tmp.path(), "simulate_report.json");
    assert_eq!(rep["config"]["nu"], 0.05);
    assert_eq!(rep["config"]["horizon"], 0.1);
    assert_eq!(rep["config"]["stepper"]["mode"], "fixed");
    assert_eq!(rep["formulation"], "lifted");
}

#[test]
fn blow_up_is_terminal() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"basis_radius": 2, "data": {"preset": "stress-large"}, "blowup_threshold": 1.0}"#;
    let o = run(tmp.path(), &["simulate"], Some(cfg), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let rep = report(tmp.path(), "simulate_report.json");
    assert_ne!(rep["status"]["kind"], "reached_horizon");
}
