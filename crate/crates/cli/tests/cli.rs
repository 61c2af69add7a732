use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn chaintail(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaintail"))
        .current_dir(dir)
        .env("CHAINTAIL_OUT", dir.join("out"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("tri.json"), r#"{"dist": [[0,1,1],[1,0,2],[1,2,0]]}"#).unwrap();
    fs::write(
        dir.path().join("martingale.json"),
        r#"{
            "model": {"kind": "martingale-family", "coefficients": [[1,0,0],[0,1,0],[1,1,1],[0,0,1]]},
            "bound": {"name": "azuma"},
            "u_grid": [1, 2, 3],
            "p_list": [1, 2],
            "reps": 3000,
            "exact": true
        }"#,
    )
    .unwrap();
    dir
}

#[test]
fn gamma_of_three_point_space() {
    let dir = workspace();
    let out = chaintail(dir.path(), &["gamma", "--space", "tri.json", "--alpha", "2", "--p", "1", "--mode", "exact"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["value"].as_f64(), Some(1.0));
    assert_eq!(v["meta"]["fitted"], Value::Bool(false));
    assert!(dir.path().join("out/gamma.json").exists());
}

#[test]
fn union_constant_is_below_sixteen() {
    let dir = workspace();
    let out = chaintail(dir.path(), &["bound", "union-constant"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let c = v["result"]["value"].as_f64().unwrap();
    assert!((c - 5.83).abs() < 0.02 && c <= 16.0, "{c}");
    assert_eq!(v["result"]["registry_value"].as_f64(), Some(16.0));
}

#[test]
fn missing_seed_is_a_usage_error() {
    let dir = workspace();
    let out = chaintail(dir.path(), &["simulate", "--config", "martingale.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
    let out = chaintail(dir.path(), &["rip", "exact", "--N", "8", "--m", "4", "--s", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_names_the_field() {
    let dir = workspace();
    fs::write(dir.path().join("bad.json"), r#"{"model": {"kind": "gaussian", "covariance": [[1]]}, "u_grdi": [1]}"#)
        .unwrap();
    let out = chaintail(dir.path(), &["simulate", "--config", "bad.json", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("u_grdi"));

    fs::write(dir.path().join("params.json"), r#"{"gamma2": 1.0}"#).unwrap();
    let out = chaintail(dir.path(), &["bound", "gaussian", "--params", "params.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = workspace();
    let out = chaintail(dir.path(), &["gamma", "--space", "tri.json", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dominated_run_exits_zero_and_prints_grid() {
    let dir = workspace();
    let out = chaintail(dir.path(), &["simulate", "--config", "martingale.json", "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("u=")).count(), 3);
    assert!(stdout.contains("exact-enumeration agrees=true"));
    let csv = fs::read_to_string(dir.path().join("out/simulate.csv")).unwrap();
    assert!(csv.starts_with("u,threshold,envelope,empirical,ci_upper,verdict\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn violated_verdict_exits_one() {
    let dir = workspace();
    // Fitted constants far too small for the bound to hold.
    fs::write(dir.path().join("tiny.json"), r#"{"chaining.C.2": 0.001, "chaining.D.2": 0.001}"#).unwrap();
    let out = chaintail(dir.path(), &["simulate", "--config", "martingale.json", "--seed", "11", "--fit", "tiny.json"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/simulate.json")).unwrap()).unwrap();
    assert_eq!(v["meta"]["fitted"], Value::Bool(true));
    assert_eq!(v["meta"]["constants"]["chaining.C.2"]["fitted"], Value::Bool(true));
    assert_eq!(v["tail"]["summary"], Value::String("violated".into()));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = workspace();
    let read = |name: &str| fs::read(dir.path().join("out").join(name)).unwrap();
    let args = ["simulate", "--config", "martingale.json", "--seed", "5"];
    chaintail(dir.path(), &args);
    let (json1, csv1) = (read("simulate.json"), read("simulate.csv"));
    chaintail(dir.path(), &["--threads", "1", args[0], args[1], args[2], args[3], args[4]]);
    assert_eq!(json1, read("simulate.json"));
    assert_eq!(csv1, read("simulate.csv"));

    let rip = ["rip", "curve", "--N", "8", "--s", "2", "--delta", "0.5", "--m-list", "3,5", "--reps", "200", "--seed", "9"];
    chaintail(dir.path(), &rip);
    let first = read("rip-curve.json");
    chaintail(dir.path(), &rip);
    assert_eq!(first, read("rip-curve.json"));
}

#[test]
fn artifacts_embed_hash_seed_and_registry() {
    let dir = workspace();
    chaintail(dir.path(), &["simulate", "--config", "martingale.json", "--seed", "5"]);
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/simulate.json")).unwrap()).unwrap();
    assert_eq!(v["meta"]["seed"].as_u64(), Some(5));
    assert_eq!(v["meta"]["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(v["meta"]["constants"]["union.c"]["value"].as_f64(), Some(16.0));

    chaintail(dir.path(), &["simulate", "--config", "martingale.json", "--seed", "6"]);
    let w: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/simulate.json")).unwrap()).unwrap();
    assert_ne!(v["meta"]["config_hash"], w["meta"]["config_hash"]);
}

#[test]
fn rip_commands() {
    let dir = workspace();
    let out = chaintail(dir.path(), &["rip", "exact", "--N", "8", "--m", "8", "--s", "2", "--seed", "1", "--export", "a.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("delta_s="));
    // m = N keeps every row: the full DFT is an isometry.
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/rip-exact.json")).unwrap()).unwrap();
    assert!(v["rip"]["delta_s"].as_f64().unwrap() < 1e-12);
    assert!(dir.path().join("a.json").exists());

    let out = chaintail(
        dir.path(),
        &["rip", "complexity", "--s", "4", "--K", "1", "--delta", "0.5", "--eta", "0.1", "--d1", "1", "--d2", "1", "--N", "64"],
    );
    let v = stdout_json(&out);
    assert_eq!(v["meta"]["fitted"], Value::Bool(true));
    assert_eq!(v["log_base"], Value::String("natural".into()));
}

#[test]
fn chaos_reports_missing_constants_and_uses_fitted_ones() {
    let dir = workspace();
    fs::write(dir.path().join("mats.json"), "[[[1,0],[0,1]],[[0,1],[1,0]]]").unwrap();
    let out = chaintail(dir.path(), &["chaos", "--matrices", "mats.json", "--p", "2"]);
    let v = stdout_json(&out);
    assert_eq!(v["meta"]["fitted"], Value::Bool(false));
    assert!(v["notes"][0].as_str().unwrap().contains("chaos.C"));

    fs::write(dir.path().join("fit.json"), r#"{"chaos.C": 1.0, "chaos.c": 1.0}"#).unwrap();
    let out = chaintail(dir.path(), &["chaos", "--matrices", "mats.json", "--p", "2", "--fit", "fit.json"]);
    let v = stdout_json(&out);
    assert_eq!(v["meta"]["fitted"], Value::Bool(true));
    assert_eq!(v["moments"].as_array().unwrap().len(), 1);
}

#[test]
fn orlicz_from_family_and_samples() {
    let dir = workspace();
    let out = chaintail(dir.path(), &["orlicz", "--family", r#"{"family": "symmetric-sign", "c": 1}"#, "--alpha", "2"]);
    let v = stdout_json(&out);
    let expected = 1.0 / 2f64.ln().sqrt();
    assert!((v["norm"]["value"].as_f64().unwrap() - expected).abs() < 1e-9);

    fs::write(dir.path().join("s.txt"), "1\n-1\n1\n-1\n").unwrap();
    let out = chaintail(dir.path(), &["orlicz", "--samples", "s.txt", "--alpha", "2", "--tol", "1e-10"]);
    let v = stdout_json(&out);
    assert!((v["norm"]["value"].as_f64().unwrap() - expected).abs() < 1e-8);

    let bytes: Vec<u8> = [1.0f64, -1.0].iter().flat_map(|x| x.to_le_bytes()).collect();
    fs::write(dir.path().join("s.bin"), bytes).unwrap();
    let out = chaintail(dir.path(), &["orlicz", "--samples", "s.bin", "--format", "f64le", "--tol", "1e-10"]);
    assert!((stdout_json(&out)["norm"]["value"].as_f64().unwrap() - expected).abs() < 1e-8);
}

#[test]
fn cover_profile_csv() {
    let dir = workspace();
    let out = chaintail(dir.path(), &["cover", "--space", "tri.json", "--alpha", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/cover.csv")).unwrap();
    assert!(csv.starts_with("radius,count\n"));
    assert!(stdout_json(&out)["entropy_integral"]["value"].as_f64().unwrap() > 0.0);
}
