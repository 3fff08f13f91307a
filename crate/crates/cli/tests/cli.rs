use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_viscid-waves"))
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(value).unwrap()).unwrap();
    p
}

fn run(dir: &Path, out: &str, args: &[&str]) -> Output {
    bin().arg("--out").arg(dir.join(out)).args(args).env_remove("VISCID_WAVES_THREADS").output().unwrap()
}

fn error_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().rev().find(|l| l.starts_with('{')).expect("error JSON on stderr");
    serde_json::from_str(line).unwrap()
}

fn regime() -> Value {
    json!({"epsilon": 0.1, "a": 1.0, "b": 1.0, "R": 1.0})
}

fn kdv_config() -> Value {
    json!({
        "regime": regime(), "n": 64, "L": 40.0, "dt": 0.05, "tau_end": 0.5,
        "initial": {"kind": "soliton", "amplitude": 1.0}, "output_every": 5
    })
}

#[test]
fn dispersion_writes_table_and_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "d.json", &json!({"k": [0.5, 1.0], "beta": 0.05, "reynolds": 1000.0}));
    let o = run(dir.path(), "out", &["dispersion", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("out/dispersion.csv")).unwrap();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    let c_im: f64 = rows[1][4].parse().unwrap();
    assert!(c_im < 0.0);
    assert_eq!(&rows[1][15], "ok");
    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "dispersion");
    assert_eq!(m["outputs"], json!(["dispersion.csv", "manifest.json"]));
    assert_eq!(m["config"]["beta"], 0.05);
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "k.json", &kdv_config());
    for out in ["a", "b"] {
        let o = run(dir.path(), out, &["kdv", "--config", cfg.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["snapshots.csv", "envelope.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn unknown_key_is_rejected_by_name() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "d.json", &json!({"k": [1.0], "beta": 0.1, "reynolds": 10.0, "reynold": 3}));
    let o = run(dir.path(), "out", &["dispersion", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_json(&o);
    assert_eq!(e["error"], "config");
    assert!(e["message"].as_str().unwrap().contains("reynold"));
    assert!(dir.path().join("out/error.json").exists());
}

#[test]
fn missing_keys_are_listed_together() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "b.json", &json!({"regime": {"epsilon": 0.1, "a": 1.0}, "n": 32}));
    let o = run(dir.path(), "out", &["boussinesq", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let msg = error_json(&o)["message"].as_str().unwrap().to_string();
    for key in ["L", "dt", "t_end", "initial", "regime.b", "regime.R"] {
        assert!(msg.contains(key), "{key}: {msg}");
    }
}

#[test]
fn epsilon_must_be_small() {
    let dir = TempDir::new().unwrap();
    let mut c = kdv_config();
    c["regime"]["epsilon"] = json!(1.2);
    let cfg = write_config(dir.path(), "k.json", &c);
    let o = run(dir.path(), "out", &["kdv", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_json(&o);
    assert_eq!(e["error"], "domain");
    assert!(e["message"].as_str().unwrap().contains("(0, 1)"));
}

#[test]
fn kdv_refuses_initial_layer_at_tau_zero() {
    let dir = TempDir::new().unwrap();
    let mut c = kdv_config();
    c["f0"] = json!("gaussian");
    let cfg = write_config(dir.path(), "k.json", &c);
    let o = run(dir.path(), "out", &["kdv", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_json(&o)["message"].as_str().unwrap().contains("tau_start"));

    c["tau_start"] = json!(0.5);
    c["tau_end"] = json!(1.0);
    let cfg = write_config(dir.path(), "k2.json", &c);
    let o = run(dir.path(), "out2", &["kdv", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn kdv_compare_covers_every_variant() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "k.json", &kdv_config());
    let o = run(dir.path(), "out", &["--threads", "2", "kdv", "--config", cfg.to_str().unwrap(), "compare"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("out/compare.csv")).unwrap();
    let variants: std::collections::BTreeSet<String> = rdr.records().map(|r| r.unwrap()[1].to_string()).collect();
    assert_eq!(variants.len(), 4);
    assert!(variants.contains("ott_sudan") && variants.contains("paper_finite"));
}

#[test]
fn boussinesq_and_blayer_runs() {
    let dir = TempDir::new().unwrap();
    let b = json!({
        "regime": regime(), "n": 32, "L": 20.0, "dt": 0.01, "t_end": 0.5,
        "initial": {"kind": "gaussian", "amplitude": 0.2, "width": 2.0},
        "switches": {"viscous_convolution": true, "ic_term": true, "nonlinear": true},
        "f0": "exp", "output_every": 10
    });
    let cfg = write_config(dir.path(), "b.json", &b);
    let o = run(dir.path(), "b", &["boussinesq", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("b/diagnostics.csv")).unwrap();
    let mass: Vec<f64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(mass.len(), 6);
    assert!(mass.iter().all(|m| (m - mass[0]).abs() < 1e-12));

    let l = json!({"regime": regime(), "freestream": "sine", "f0": "gaussian", "x": 0.3, "times": [0.5, 1.0], "n_gamma": 11});
    let cfg = write_config(dir.path(), "l.json", &l);
    let o = run(dir.path(), "l", &["blayer", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("l/profile.csv")).unwrap();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 22);
    let u0: f64 = rows[0][2].parse().unwrap();
    assert!(u0.abs() < 1e-10, "no slip: {u0}");
}

#[test]
fn validate_reports_all_checks() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), "out", &["validate"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 5);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/validation.json")).unwrap()).unwrap();
    assert_eq!(r["checks"].as_array().unwrap().len(), 5);
}

#[test]
fn zero_threads_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), "out", &["--threads", "0", "validate"]);
    assert_eq!(o.status.code(), Some(2));
}
