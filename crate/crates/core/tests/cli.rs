use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gwass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwass")).args(args).env_remove("GWASS_SEED").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn dirac(x: f64) -> String {
    format!(r#"{{"dim": 1, "atoms": [{{"x": [{x}], "w": 1.0}}]}}"#)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(|f| f.parse().unwrap()).collect()).collect()
}

#[test]
fn dist_on_small_measures() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (write(dir.path(), "a.json", &dirac(0.0)), write(dir.path(), "b.json", &dirac(3.0)));
    let empty = write(dir.path(), "e.json", r#"{"dim": 1, "atoms": []}"#);

    let out = gwass(&["dist", &a, &b]);
    assert!(out.status.success());
    assert_eq!(json(&out)["value"], 2.0);

    assert_eq!(json(&gwass(&["dist", &a, &a]))["value"], 0.0);
    assert_eq!(json(&gwass(&["dist", &empty, &a, "--a", "2"]))["value"], 2.0);
}

#[test]
fn plan_csv_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (write(dir.path(), "a.json", &dirac(0.0)), write(dir.path(), "b.json", &dirac(0.5)));
    let plan = dir.path().join("plan.csv");
    assert!(gwass(&["dist", &a, &b, "--plan-csv", plan.to_str().unwrap()]).status.success());
    assert!(std::fs::read_to_string(plan).unwrap().lines().count() >= 2);
}

#[test]
fn errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{not json");
    let a = write(dir.path(), "a.json", &dirac(0.0));
    let out = gwass(&["dist", &bad, &a]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert_eq!(gwass(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(gwass(&["dist", &a, &a, "--a", "-1"]).status.code(), Some(2));
}

#[test]
fn verify_reports_are_reproducible() {
    let first = gwass(&["verify", "metrization", "--json"]);
    assert_eq!(first.status.code(), Some(0));
    let second = gwass(&["verify", "metrization", "--json"]);
    assert_eq!(first.stdout, second.stdout);
    assert!(!String::from_utf8_lossy(&first.stdout).contains("wall_time"));
}

#[test]
fn seed_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_gwass"))
        .args(["verify", "metric", "--json"])
        .env("GWASS_SEED", "1234")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(json(&out)["seed"], 1234);
}

#[test]
fn simulate_reference() {
    let dir = tempfile::tempdir().unwrap();
    let out = gwass(&["simulate", "--reference", "--k", "5", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let snapshots = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("snapshot_"))
        .count();
    assert_eq!(snapshots, 33);
    let mass = csv_rows(&dir.path().join("mass.csv"));
    assert_eq!(mass.len(), 33);
    assert!(mass.windows(2).all(|w| w[1][1] >= w[0][1]));
    assert!(mass.iter().all(|r| r[1] <= r[2] + 1e-12));
}

#[test]
fn constant_field_without_source_translates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"initial": {"dim": 2, "atoms": [{"x": [0.0, 1.0], "w": 0.5}, {"x": [2.0, -1.0], "w": 1.5}]},
            "field": {"dim": 2, "base": {"kind": "constant", "c": [0.25, -0.5]}},
            "t_final": 2.0, "k": 3}"#,
    );
    let out_dir = dir.path().join("out");
    assert!(gwass(&["simulate", &cfg, "--out", out_dir.to_str().unwrap()]).status.success());
    let last: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("snapshot_00008.json")).unwrap()).unwrap();
    let atoms = last["atoms"].as_array().unwrap();
    let expected = [([0.5, 0.0], 0.5), ([2.5, -2.0], 1.5)];
    assert_eq!(atoms.len(), 2);
    for (atom, (x, w)) in atoms.iter().zip(expected) {
        assert!((atom["x"][0].as_f64().unwrap() - x[0]).abs() < 1e-12);
        assert!((atom["x"][1].as_f64().unwrap() - x[1]).abs() < 1e-12);
        assert_eq!(atom["w"], w);
    }
}

#[test]
fn cauchy_table_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"initial": "mu.json",
            "field": {"dim": 1, "base": {"kind": "constant", "c": [0.5]},
                      "kernel": {"kind": "bump", "radius": 0.5, "height": 0.3}, "mass_cap": 2.0},
            "source": {"cloud": {"dim": 1, "atoms": [{"x": [0.0], "w": 0.2}]}},
            "k": 3, "k_range": [3, 8], "dependence": {"shift": [0.05], "k": 4}}"#,
    );
    write(dir.path(), "mu.json", r#"{"dim": 1, "atoms": [{"x": [-0.2], "w": 0.5}, {"x": [0.3], "w": 0.5}]}"#);
    let out_dir = dir.path().join("out");
    let out = gwass(&["simulate", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&out_dir.join("cauchy.csv"));
    assert_eq!(rows.len(), 5);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
    assert!(rows.iter().all(|r| r[1] <= r[2]));
    assert!(out_dir.join("dependence.csv").exists());
    assert!(json(&out)["cauchy_within_bounds"].as_bool().unwrap());
}

#[test]
fn invalid_config_lists_each_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"field": {"dim": 1, "base": {"kind": "constant", "c": [0.5]}},
            "k": -1, "t_final": 0.0, "params": {"a": 1.0, "b": 1.0, "p": 0.5}}"#,
    );
    let out = gwass(&["simulate", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for key in ["initial", "k:", "t_final", "params"] {
        assert!(err.contains(key), "{key} not reported in {err}");
    }
}
