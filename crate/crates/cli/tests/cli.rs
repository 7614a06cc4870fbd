use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../core/fixtures/{name}.spec"))
}

fn cuspvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuspvar")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn h1z2_prints_json() {
    let spec = fixture("abelian");
    let out = cuspvar(&["h1z2", "--spec", spec.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["result"]["k"], 1);
    assert_eq!(v["result"]["degree_bound"], 2);
    assert_eq!(v["config"]["seed"], 1);
    assert!(v.get("timings").is_none());
}

#[test]
fn missing_spec_is_an_error() {
    let out = cuspvar(&["complete"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--spec"));
}

#[test]
fn complete_reports_eta() {
    let spec = fixture("fig8");
    let out = cuspvar(&["complete", "--spec", spec.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["status"], "pass");
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"].as_str().unwrap().contains("eta")));
}

#[test]
fn non_hyperbolic_certify_fails() {
    let dir = tempfile::tempdir().unwrap();
    let spec = fixture("torus_knot");
    let out = cuspvar(&["certify", "--spec", spec.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("certify.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "fail");
}

#[test]
fn apoly_writes_the_eliminant() {
    let dir = tempfile::tempdir().unwrap();
    let spec = fixture("abelian");
    let out = cuspvar(&["apoly", "--spec", spec.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(dir.path().join("apoly.txt")).unwrap().trim(), "l^2 - 1");
}

#[test]
fn apoly_budget_suggests_sampling() {
    let spec = fixture("wlink");
    let out = cuspvar(&["apoly", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert!(v["checks"][0]["detail"].as_str().unwrap().contains("apoly --sample"));
}

#[test]
fn fill_writes_path_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = fixture("fig8");
    let out = cuspvar(&[
        "fill",
        "--kappa",
        "1,7",
        "--csv",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_path(dir.path().join("fill_path.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["t", "re_u1", "im_u1", "re_v1", "im_v1", "volume"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 129);
    let last: f64 = rows.last().unwrap()[5].parse().unwrap();
    assert!((last - 1.97246019733057).abs() < 1e-5);
}

#[test]
fn bad_kappa_is_rejected() {
    let spec = fixture("fig8");
    let out = cuspvar(&["fill", "--kappa", "2,4", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn timings_only_on_request() {
    let spec = fixture("fig8");
    let out = cuspvar(&["complete", "--timings", "--spec", spec.to_str().unwrap()]);
    assert!(json(&out)["timings"]["complete"].is_number());
}

#[test]
fn identical_seeds_give_identical_reports() {
    let spec = fixture("fig8");
    let run = || cuspvar(&["loops", "--count", "4", "--seed", "9", "--spec", spec.to_str().unwrap()]).stdout;
    assert_eq!(run(), run());
}
