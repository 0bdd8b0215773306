use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn olct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_olct")).args(args).output().unwrap()
}

fn write(path: &Path, v: &Value) -> String {
    std::fs::write(path, v.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn multi_config(dir: &Path, noise: f64) -> Value {
    json!({
        "id": "cli",
        "solver": "multi-olct",
        "signal": {"kind": "random_compact", "n": 8, "seed": 1, "length": 8, "step": 1.0},
        "matrices": {"rule": "ratio_sweep", "count": 24, "seed": 2},
        "noise_sigma": noise,
        "output_path": dir.join("out"),
    })
}

#[test]
fn forward_then_inverse_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let x = json!({"origin": -2, "step": 0.5, "re": [0.1, 1.0, -0.5, 0.3], "im": [0.0, 0.2, 0.4, -0.1]});
    let input = write(&dir.path().join("x.json"), &x);
    let spec = dir.path().join("spec.json");
    let back = dir.path().join("back.json");
    let m = "0.3,1.2,-0.6833333333333333,0.6,0.2,-0.4";
    let out = olct(&["olct", "--matrix", m, "--in", &input, "--out", spec.to_str().unwrap(), "--fast"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = olct(&[
        "olct", "--matrix", m, "--in", spec.to_str().unwrap(), "--out", back.to_str().unwrap(), "--inverse",
        "--grid", "-1,0.5,4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let y = read(&back);
    for part in ["re", "im"] {
        for (p, q) in x[part].as_array().unwrap().iter().zip(y[part].as_array().unwrap()) {
            assert!((p.as_f64().unwrap() - q.as_f64().unwrap()).abs() < 1e-10);
        }
    }
}

#[test]
fn recover_prints_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir.path().join("cfg.json"), &multi_config(dir.path(), 0.0));
    let out = olct(&["recover", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn experiment_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir.path().join("cfg.json"), &multi_config(dir.path(), 1e-6));
    let out = olct(&["experiment", "--config", &cfg, "--workers", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    assert!(csv.starts_with("experiment_id,solver,N,num_matrices,noise_sigma,residual,runtime_ms,verdict"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn negative_noise_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir.path().join("cfg.json"), &multi_config(dir.path(), -0.1));
    let out = olct(&["experiment", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("noise"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn missing_input_is_a_config_error() {
    let out = olct(&["olct", "--matrix", "0,1,-1,0", "--in", "/nonexistent.json", "--out", "/tmp/x", "--fast"]);
    assert_eq!(out.status.code(), Some(2));
}
