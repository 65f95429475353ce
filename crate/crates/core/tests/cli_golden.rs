mod common;

use std::path::Path;

use serde_json::Value;

use common::*;
use rdx_gauss::cli::ModelFile;
use rdx_gauss::model::derive_stats;

fn record(dir: &Path, args: &[&str]) -> Value {
    let out = rdx(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn nats(v: &Value) -> f64 {
    v["nats"].as_f64().unwrap()
}

/// Every `{nats, bits}` pair in `v`, recursively.
fn rate_pairs(v: &Value, found: &mut Vec<(f64, f64)>) {
    match v {
        Value::Object(map) => {
            if let (Some(n), Some(b)) = (map.get("nats").and_then(Value::as_f64), map.get("bits").and_then(Value::as_f64)) {
                found.push((n, b));
            }
            map.values().for_each(|x| rate_pairs(x, found));
        }
        Value::Array(items) => items.iter().for_each(|x| rate_pairs(x, found)),
        _ => {}
    }
}

#[test]
fn outputs_match_golden_files() {
    let bad = check_golden();
    assert!(bad.is_empty(), "golden mismatch: {bad:?} (rerun with UPDATE_GOLDEN=1 after intended changes)");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = scratch_dir("repeat");
    write_golden_inputs(&dir);
    for case in GOLDEN_CASES {
        let a = rdx(&dir, case.args);
        let b = rdx(&dir, case.args);
        assert!(a.status.success(), "{}", case.name);
        assert_eq!(a.stdout, b.stdout, "{}", case.name);
    }
}

#[test]
fn every_rate_in_bits_is_nats_over_ln2() {
    let dir = scratch_dir("units");
    write_golden_inputs(&dir);
    let mut pairs = Vec::new();
    for case in GOLDEN_CASES {
        let out = rdx(&dir, case.args);
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        rate_pairs(&v, &mut pairs);
    }
    assert!(pairs.len() > 10);
    for (n, b) in pairs {
        assert_eq!(b, n / std::f64::consts::LN_2);
    }
}

#[test]
fn scalar_pipeline_bounds_coincide() {
    let dir = scratch_dir("scalar");
    assert!(rdx(&dir, &["gen", "--nx", "1", "--ny", "1", "--nz", "1", "--seed", "7", "--out", "m.json"]).status.success());
    let v = record(&dir, &["bounds", "--model", "m.json", "--t", "0.5"]);
    assert_eq!(v["outputs"]["coincide"], Value::Bool(true));
    assert!((nats(&v["outputs"]["lower"]) - 0.5 * 2f64.ln()).abs() <= 1e-9);
}

#[test]
fn unit_scale_gives_zero_rate() {
    let dir = scratch_dir("zero");
    write_golden_inputs(&dir);
    let b = record(&dir, &["bounds", "--model", "model.json", "--t", "1.0"]);
    assert!(nats(&b["outputs"]["upper"]).abs() <= 1e-9);
    assert!(nats(&b["outputs"]["lower"]).abs() <= 1e-9);
    let e = record(&dir, &["exact", "--model", "model.json", "--t", "1.0"]);
    assert!(nats(&e["outputs"]["rate"]).abs() <= 1e-9);
}

#[test]
fn mse_at_budget_edge_is_free() {
    let dir = scratch_dir("mse-edge");
    write_golden_inputs(&dir);
    let m = ModelFile::parse(&std::fs::read_to_string(dir.join("model.json")).unwrap()).unwrap().to_model().unwrap();
    let s = derive_stats(&m).unwrap();
    let d = s.sigma_x_given_z.matrix().trace() / s.n_x() as f64;
    let v = record(&dir, &["mse", "--model", "model.json", "--mse-d", &format!("{d:?}")]);
    assert!(nats(&v["outputs"]["rate"]).abs() <= 1e-9);
}

#[test]
fn malformed_input_exits_1() {
    let dir = scratch_dir("exit1");
    std::fs::write(dir.join("bad.json"), "{ not json").unwrap();
    std::fs::write(dir.join("wrong.json"), r#"{"schema_version":"other/9","dims":{"n_x":1,"n_y":1,"n_z":1}}"#).unwrap();
    for args in [
        &["bounds", "--model", "bad.json", "--t", "0.5"][..],
        &["bounds", "--model", "wrong.json", "--t", "0.5"],
        &["bounds", "--model", "bad.json"],
        &["nosuchcommand"],
        &["sweep", "--model", "bad.json", "--points", "1"],
    ] {
        let out = rdx(&dir, args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn infeasible_target_exits_2_and_names_the_condition() {
    let dir = scratch_dir("exit2");
    write_golden_inputs(&dir);
    let out = rdx(&dir, &["bounds", "--model", "model.json", "--t", "-0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("D - Sigma_x|yz must be positive definite"));

    let out = rdx(&dir, &["mse", "--model", "model.json", "--mse-d", "1e6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tr(Sigma_x|z)"));

    let out = rdx(&dir, &["exact", "--model", "model.json", "--t", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_0() {
    let dir = scratch_dir("help");
    let out = rdx(&dir, &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("simulate"));
}
