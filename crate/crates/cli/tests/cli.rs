use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn slelab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slelab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

fn schema() -> Value {
    serde_json::from_str(include_str!("../manifest.schema.json")).unwrap()
}

/// Required keys and the closed key sets of the published schema.
fn conforms(m: &Value, s: &Value) {
    let obj = m.as_object().unwrap();
    for k in s["required"].as_array().unwrap() {
        assert!(obj.contains_key(k.as_str().unwrap()), "missing {k}");
    }
    let props = s["properties"].as_object().unwrap();
    for k in obj.keys() {
        assert!(props.contains_key(k), "unexpected key {k}");
    }
    let cfg = &props["config"];
    for k in m["config"].as_object().unwrap().keys() {
        assert!(cfg["properties"].as_object().unwrap().contains_key(k), "unexpected config key {k}");
    }
    for (list, spec) in [("stages", "stages"), ("assertions", "assertions"), ("artifacts", "artifacts")] {
        for item in m[list].as_array().unwrap() {
            for k in props[spec]["items"]["required"].as_array().unwrap() {
                assert!(item.get(k.as_str().unwrap()).is_some(), "{list} item missing {k}");
            }
        }
    }
    assert_eq!(m["schema"], s["properties"]["schema"]["const"]);
}

#[test]
fn params_reports_carpet_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let o = slelab(&["params", "--kappa", "4", "--seed", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let p: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(p["d_carpet"].as_f64(), Some(1.875));
    let file: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("params.json")).unwrap()).unwrap();
    assert_eq!(file, p);
}

#[test]
fn ode_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = slelab(&["ode-check", "--kappa", "6", "--seed", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("ode_check.json")).unwrap()).unwrap();
    assert!(r["residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn trace_reruns_are_bitwise_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["sle-trace", "--kappa", "6", "--seed", "7", "--steps", "2000"];
    assert_eq!(slelab(&args, a.path()).status.code(), Some(0));
    assert_eq!(slelab(&[&args[..], &["--workers", "2"]].concat(), b.path()).status.code(), Some(0));
    let read = |d: &Path| fs::read(d.join("trace_seed7.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_eq!(manifest(a.path())["artifacts"], manifest(b.path())["artifacts"]);
}

#[test]
fn manifest_follows_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = slelab(&["sle-trace", "--kappa", "3", "--seed", "2", "--seed", "3", "--steps", "500", "--svg"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let m = manifest(dir.path());
    conforms(&m, &schema());
    assert_eq!(m["params"]["kappa"].as_f64(), Some(3.0));
    let files: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(files.iter().filter(|f| f.starts_with("manifest")).count(), 1);
    assert!(!files.iter().any(|f| f.ends_with(".tmp")));
    for a in m["artifacts"].as_array().unwrap() {
        let bytes = fs::read(dir.path().join(a["file"].as_str().unwrap())).unwrap();
        assert_eq!(a["bytes"].as_u64(), Some(bytes.len() as u64));
    }
    assert_eq!(m["artifacts"].as_array().unwrap().len(), 5);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = slelab(&["carpet", "--kappa", "5", "--seed", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`kappa`"));
    let o = slelab(&["params", "--kappa", "4"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"kapa": 4}"#).unwrap();
    let o = slelab(&["params", "--config", bad.to_str().unwrap(), "--seed", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"subcommand": "params", "kappa": 3.0, "seeds": [5], "svg": true}"#).unwrap();
    let out = dir.path().join("o");
    let o = slelab(&["params", "--config", cfg.to_str().unwrap(), "--kappa", "6", "--no-csv"], &out);
    assert_eq!(o.status.code(), Some(0));
    let m = manifest(&out);
    assert_eq!(m["config"]["kappa"].as_f64(), Some(6.0));
    assert_eq!(m["config"]["seeds"][0].as_u64(), Some(5));
    assert_eq!(m["config"]["svg"], Value::Bool(true));
    assert_eq!(m["config"]["csv"], Value::Bool(false));
}

#[test]
fn random_seed_is_opt_in_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let o = slelab(&["params", "--kappa", "4", "--random-seed"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(manifest(dir.path())["config"]["seeds"].as_array().unwrap().len(), 1);
}

#[test]
fn statistical_failure_exits_3() {
    // too few steps to resolve the fractal scales
    let dir = tempfile::tempdir().unwrap();
    let o = slelab(&["dim-est", "--kappa", "6", "--seed", "1", "--steps", "200"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let m = manifest(dir.path());
    assert_eq!(m["assertions"][0]["passed"], Value::Bool(false));
}
