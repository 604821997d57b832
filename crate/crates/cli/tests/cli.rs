use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipfree"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

/// A temp dir holding the grids A_2 and A_3 and the geometric line {0,3,9,27,81}.
fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&run(p, &["space", "grid", "--n", "2", "--out", "a2.json"])), 0);
    assert_eq!(code(&run(p, &["space", "grid", "--n", "3", "--out", "a3.json"])), 0);
    write(p, "pts.json", r#"{"points":[["0"],["3"],["9"],["27"],["81"]],"base":0}"#);
    assert_eq!(code(&run(p, &["space", "euclid", "pts.json", "--out", "line.json"])), 0);
    dir
}

#[test]
fn grid_and_verify() {
    let dir = workspace();
    let p = dir.path();
    let a2: Value = serde_json::from_str(&std::fs::read_to_string(p.join("a2.json")).unwrap()).unwrap();
    assert_eq!(a2["labels"].as_array().unwrap().len(), 9);
    assert_eq!(a2["dist"][0][8], "1/2*sqrt(2)");
    let ok = run(p, &["space", "verify", "a2.json"]);
    assert_eq!(code(&ok), 0);
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("ok (9 points)"));

    write(p, "bad.json", r#"{"labels":["a","b","c"],"dist":[["0","5","1"],["5","0","1"],["1","1","0"]],"base":0}"#);
    let bad = run(p, &["space", "verify", "bad.json"]);
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stdout).contains("triangle violation"));
}

#[test]
fn amalgam_distances_pass_through_the_base() {
    let dir = workspace();
    let p = dir.path();
    let k = json(&run(p, &["space", "amalgam", "a2.json", "a3.json"]));
    let labels: Vec<&str> = k["labels"].as_array().unwrap().iter().map(|l| l.as_str().unwrap()).collect();
    assert_eq!(labels.len(), 24);
    let i = labels.iter().position(|&l| l == "0:(1/4,0)").unwrap();
    let j = labels.iter().position(|&l| l == "1:(1/9,0)").unwrap();
    assert_eq!(k["dist"][i][j], "13/36");
}

#[test]
fn norms_with_certificates() {
    let dir = workspace();
    let p = dir.path();
    write(p, "mol.json", r#"{"space":"a2.json","coeffs":{"(1/4,0)":"1","(0,1/4)":"-1"}}"#);
    let v = json(&run(p, &["norm", "mol.json"]));
    assert_eq!(v["value"], "1/4*sqrt(2)");
    assert_eq!(v["gap"], "0");
    let f = json(&run(p, &["--mode", "float", "norm", "mol.json"]));
    assert!((f["value"].as_f64().unwrap() - 2f64.sqrt() / 4.0).abs() < 1e-12);

    write(p, "zero.json", r#"{"space":"a2.json","coeffs":{}}"#);
    let z = json(&run(p, &["norm", "zero.json", "--method", "primal"]));
    assert_eq!(z["value"], "0");
    assert_eq!(z["primal_terms"].as_array().unwrap().len(), 0);
}

#[test]
fn random_norms_depend_only_on_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let a = run(p, &["norm", "--random", "3", "--seed", "7"]);
    let b = run(p, &["norm", "--random", "3", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = run(p, &["norm", "--random", "3", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
    let csv = run(p, &["norm", "--random", "3", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("index,value,gap"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn lemma_verify_and_select() {
    let dir = workspace();
    let p = dir.path();
    write(p, "sys.json", r#"{"space":"line.json","pairs":[["(3)","(9)"],["(27)","(81)"]],"K":"1/3"}"#);
    let v = json(&run(p, &["lemma", "verify", "sys.json"]));
    assert_eq!(v["passed"], true);

    write(p, "badsys.json", r#"{"space":"line.json","pairs":[[1,3],[2,3]],"K":"1/3"}"#);
    let bad = run(p, &["lemma", "verify", "badsys.json"]);
    assert_eq!(code(&bad), 1);

    let sel = json(&run(p, &["lemma", "select", "unbounded", "line.json"]));
    assert_eq!(sel["passed"], true);
    assert!(!sel["pairs"].as_array().unwrap().is_empty());
}

#[test]
fn extension_certificate_and_samples() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write(p, "job.json", r#"{"points":[[0,0],[1,0]],"values":[0,1],"epsilon":0.1,"gridstep":0.01}"#);
    let out = run(p, &["extend", "job.json", "--csv", "g.csv"]);
    let cert = json(&out);
    assert_eq!(cert["passed"], true);
    assert_eq!(cert["residual"].as_f64().unwrap(), 0.0);
    let csv = std::fs::read_to_string(p.join("g.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x1,x2,g"));
    assert!(csv.lines().count() > 100);

    write(p, "close.json", r#"{"points":[[0,0],[0.1,0]],"values":[0,1],"epsilon":0.1,"gridstep":0.01,"delta":0.05}"#);
    assert_eq!(code(&run(p, &["extend", "close.json"])), 2);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = workspace();
    let p = dir.path();
    assert_eq!(code(&run(p, &["norm", "missing.json"])), 2);
    write(p, "sub.json", r#"{"space":"a2.json","vectors":[{"coeffs":{"(1/4,0)":"1"}}]}"#);
    assert_eq!(code(&run(p, &["--mode", "float", "approx", "claim5", "sub.json"])), 2);
    assert_eq!(code(&run(p, &["--tol", "0", "space", "grid", "--n", "2"])), 2);
}

#[test]
fn acceptance_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let a = run(p, &["accept", "--seed", "1", "--out", "a.json"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stdout));
    let table = String::from_utf8(a.stdout).unwrap();
    assert_eq!(table.lines().filter(|l| l.contains(": PASS")).count(), 9);
    assert_eq!(code(&run(p, &["accept", "--seed", "1", "--out", "b.json"])), 0);
    assert_eq!(std::fs::read(p.join("a.json")).unwrap(), std::fs::read(p.join("b.json")).unwrap());
}
