//! End-to-end runs of the `morrey-lab` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn lab(args: &[&str], dir: Option<&Path>, env_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_morrey-lab"));
    cmd.args(args).env_remove("MORREY_LAB_REPORT_DIR");
    if let Some(d) = dir {
        cmd.arg("--output-dir").arg(d);
    }
    if let Some(d) = env_dir {
        cmd.env("MORREY_LAB_REPORT_DIR", d);
    }
    cmd.output().expect("binary runs")
}

fn report(dir: &Path, experiment: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{experiment}.json"))).unwrap()).unwrap()
}

#[test]
fn redw_planar_example_passes_with_twelve_cubes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("verify_redw.toml");
    let out = lab(&["verify-redw", "--config", cfg.to_str().unwrap()], Some(tmp.path()), None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(tmp.path(), "verify_redw");
    assert_eq!(r["measured"]["count_per_annulus"], 12);
    assert_eq!(r["passed"], true);
}

#[test]
fn norm_of_unit_constant_is_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("norm.toml");
    let out = lab(&["norm", "--config", cfg.to_str().unwrap()], Some(tmp.path()), None);
    assert_eq!(out.status.code(), Some(0));
    let v = report(tmp.path(), "norm")["measured"]["morrey_norm"].as_f64().unwrap();
    assert!((v - 1.0).abs() <= 1e-12, "{v}");
}

#[test]
fn malformed_config_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "seed = \"one\"\n[grid\n").unwrap();
    let out = lab(&["norm", "--config", bad.to_str().unwrap()], Some(&tmp.path().join("out")), None);
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn invalid_parameter_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("kp.toml");
    fs::write(&cfg, "[key_property]\nnu = 0.5\nsamples = 10\npoints = { kind = \"explicit\", points = [[0.0], [1.0]] }\n").unwrap();
    let out = lab(&["verify-kp", "--config", cfg.to_str().unwrap()], Some(tmp.path()), None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_check_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("kp.toml");
    // 1 and 1.1 are too close for nu = 2
    fs::write(&cfg, "[key_property]\nnu = 2.0\nsamples = 10\npoints = { kind = \"explicit\", points = [[1.0], [1.1]] }\n").unwrap();
    let out = lab(&["verify-kp", "--config", cfg.to_str().unwrap()], Some(tmp.path()), None);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lacunary_condition"));
    assert_eq!(report(tmp.path(), "verify_key_property")["passed"], false);
}

#[test]
fn output_directory_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let from_config = tmp.path().join("from_config");
    let from_env = tmp.path().join("from_env");
    let from_flag = tmp.path().join("from_flag");
    let cfg = tmp.path().join("norm.toml");
    let base = fs::read_to_string(config("norm.toml")).unwrap();
    fs::write(&cfg, format!("output_dir = {:?}\n{base}", from_config.to_str().unwrap())).unwrap();
    let args = ["norm", "--config", cfg.to_str().unwrap()];

    assert_eq!(lab(&args, None, None).status.code(), Some(0));
    assert!(from_config.join("norm.json").exists());

    assert_eq!(lab(&args, None, Some(&from_env)).status.code(), Some(0));
    assert!(from_env.join("norm.json").exists());

    assert_eq!(lab(&args, Some(&from_flag), Some(&from_env)).status.code(), Some(0));
    assert!(from_flag.join("norm.json").exists());
}
