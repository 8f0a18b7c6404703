//! Exit codes and reports of the `subdiag` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use subdiag::files::ReportFile;

struct Run {
    code: i32,
    report: Option<ReportFile>,
    stderr: String,
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_subdiag"));
    c.env_remove("SUBDIAG_SEED");
    c
}

fn run(dir: &Path, args: &[&str]) -> Run {
    run_with(bin(), dir, args)
}

fn run_with(mut cmd: Command, dir: &Path, args: &[&str]) -> Run {
    let out = dir.join("report.json");
    let _ = fs::remove_file(&out);
    let o = cmd.args(args).arg("-o").arg(&out).output().unwrap();
    Run {
        code: o.status.code().unwrap(),
        report: fs::read_to_string(&out).ok().map(|t| ReportFile::parse(&t).unwrap()),
        stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
    }
}

fn matrix(dir: &Path, name: &str, blocks: &[usize], rows: &[&[f64]]) -> PathBuf {
    let data: Vec<Vec<[f64; 2]>> = rows.iter().map(|r| r.iter().map(|&x| [x, 0.0]).collect()).collect();
    let v = serde_json::json!({ "n": rows.len(), "blocks": blocks, "data": data });
    let p = dir.join(name);
    fs::write(&p, v.to_string()).unwrap();
    p
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn det_of_diag_1_4() {
    let dir = tempfile::tempdir().unwrap();
    let f = matrix(dir.path(), "d.json", &[1, 1], &[&[1.0, 0.0], &[0.0, 4.0]]);
    let r = run(dir.path(), &["det", "-i", f.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = r.report.unwrap();
    assert_eq!(rep.command, "det");
    assert_eq!(rep.schema_version, "1");
    assert!((num(&rep.results["value"]) - 2.0).abs() < 1e-15);
}

#[test]
fn det_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let f = matrix(dir.path(), "d.json", &[2], &[&[1.0, 0.0], &[0.0, 4.0]]);
    let o = bin().args(["det", "-i", f.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let rep = ReportFile::parse(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert!((num(&rep.results["value"]) - 2.0).abs() < 1e-15);
    assert!(o.stderr.is_empty());
}

#[test]
fn singular_factor_reports_determinant_zero() {
    let dir = tempfile::tempdir().unwrap();
    let f = matrix(dir.path(), "s.json", &[1, 1], &[&[1.0, 1.0], &[1.0, 1.0]]);
    let r = run(dir.path(), &["factor", "-i", f.to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report.unwrap().results["error"], "DeterminantZero");
}

#[test]
fn factor_of_invertible_input() {
    let dir = tempfile::tempdir().unwrap();
    let f = matrix(dir.path(), "k.json", &[1, 1], &[&[0.0, 1.0], &[1.0, 0.0]]);
    for side in ["right", "left"] {
        let r = run(dir.path(), &["factor", "-i", f.to_str().unwrap(), "--side", side]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let rep = r.report.unwrap();
        assert!(rep.margins["reconstruction"] > -1e-12);
    }
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"n":2,"blocks":[1],"data":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#).unwrap();
    let nan = dir.path().join("nan.json");
    fs::write(&nan, r#"{"n":1,"blocks":[1],"data":[[[NaN,0]]]}"#).unwrap();
    for args in [
        vec!["det", "-i", bad.to_str().unwrap()],
        vec!["det", "-i", nan.to_str().unwrap()],
        vec!["det", "-i", "/nonexistent.json"],
        vec!["frobnicate"],
        vec!["det"],
        vec!["scan", "--n", "0"],
        vec!["campaign", "--modules", "nope"],
    ] {
        let r = run(dir.path(), &args);
        assert_eq!(r.code, 2, "{args:?}");
        assert!(r.report.is_none());
    }
}

#[test]
fn blocks_flag_overrides_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = matrix(dir.path(), "a.json", &[2], &[&[1.0, 2.0], &[3.0, 4.0]]);
    let r = run(dir.path(), &["phi", "-i", f.to_str().unwrap(), "--blocks", "1,1"]);
    assert_eq!(r.code, 0);
    let rep = r.report.unwrap();
    assert_eq!(rep.results["phi"][0][1][0], 0.0);
    let r = run(dir.path(), &["phi", "-i", f.to_str().unwrap(), "--blocks", "1,2"]);
    assert_eq!(r.code, 2);
}

#[test]
fn outer_check_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let h = matrix(dir.path(), "h.json", &[1, 1], &[&[1.0, 5.0], &[0.0, 2.0]]);
    let r = run(dir.path(), &["outer-check", "-i", h.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report.unwrap().results["outer"], true);
    let e = matrix(dir.path(), "e.json", &[1, 1], &[&[0.0, 1.0], &[0.0, 0.0]]);
    let r = run(dir.path(), &["outer-check", "-i", e.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report.unwrap().results["outer"], false);
    let low = matrix(dir.path(), "l.json", &[1, 1], &[&[1.0, 0.0], &[1.0, 1.0]]);
    assert_eq!(run(dir.path(), &["outer-check", "-i", low.to_str().unwrap()]).code, 2);
}

#[test]
fn szego_modes() {
    let dir = tempfile::tempdir().unwrap();
    let h = matrix(dir.path(), "h.json", &[1, 1], &[&[1.0, 0.0], &[0.0, 4.0]]);
    for mode in ["closed-form", "witness-a", "search-d"] {
        let r = run(dir.path(), &["szego", "-i", h.to_str().unwrap(), "--mode", mode]);
        assert_eq!(r.code, 0, "{mode}: {}", r.stderr);
        assert!((num(&r.report.unwrap().results["value"]) - 2.0).abs() < 1e-6);
    }
    let neg = matrix(dir.path(), "n.json", &[2], &[&[1.0, 0.0], &[0.0, -1.0]]);
    assert_eq!(run(dir.path(), &["szego", "-i", neg.to_str().unwrap()]).code, 2);
    let r = run(dir.path(), &["szego", "-i", h.to_str().unwrap(), "--p", "-1"]);
    assert_eq!(r.code, 2);
}

#[test]
fn riesz_and_lift() {
    let dir = tempfile::tempdir().unwrap();
    let f = matrix(dir.path(), "f.json", &[1, 1], &[&[0.0, 1.0], &[1.0, 0.0]]);
    assert_eq!(run(dir.path(), &["riesz", "-i", f.to_str().unwrap()]).code, 0);
    let p = matrix(dir.path(), "p.json", &[1, 1], &[&[1.0, 0.0], &[0.0, 4.0]]);
    let r = run(dir.path(), &["lift", "-i", p.to_str().unwrap(), "--p", "2"]);
    assert_eq!(r.code, 0);
    assert!((num(&r.report.unwrap().results["det"]) - 2f64.sqrt()).abs() < 1e-12);
    let s = matrix(dir.path(), "s.json", &[1, 1], &[&[1.0, 1.0], &[1.0, 1.0]]);
    assert_eq!(run(dir.path(), &["riesz", "-i", s.to_str().unwrap()]).code, 1);
    assert_eq!(run(dir.path(), &["lift", "-i", f.to_str().unwrap()]).code, 2);
}

#[test]
fn circle_commands() {
    let dir = tempfile::tempdir().unwrap();
    let n = 1024;
    let mut text = String::new();
    let mut sq = String::new();
    for j in 0..n {
        let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        let (re, im) = (1.0 + 0.5 * t.cos(), 0.5 * t.sin());
        text.push_str(&format!("{re:.17e},{im:.17e}\n"));
        sq.push_str(&format!("{:.17e},0\n", re * re + im * im));
    }
    let f = dir.path().join("f.csv");
    fs::write(&f, text).unwrap();
    let r = run(dir.path(), &["circle-outer", "-i", f.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!((num(&r.report.unwrap().results["delta"]) - 1.0).abs() < 1e-10);
    let w = dir.path().join("w.csv");
    fs::write(&w, sq).unwrap();
    let r = run(dir.path(), &["circle-szego", "-i", w.to_str().unwrap(), "--degree", "32"]);
    assert_eq!(r.code, 0);
    assert!((num(&r.report.unwrap().results["value"]) - 1.0).abs() < 1e-3);
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,0\n2,0\n3,0\n").unwrap();
    assert_eq!(run(dir.path(), &["circle-outer", "-i", bad.to_str().unwrap()]).code, 2);
}

#[test]
fn scan_emits_replayable_counterexamples() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(dir.path(), &["scan", "--n", "2", "--trials", "500", "--seed", "42"]);
    assert_eq!(r.code, 1);
    let rep = r.report.unwrap();
    let ce = rep.results["counterexamples"].as_array().unwrap();
    assert!(!ce.is_empty());
    assert!(num(&rep.results["min_margin"]) < -1e-9);
    assert_eq!(rep.seed, 42);
}

#[test]
fn scan_on_diagonal_algebra_is_clean() {
    // A = D = M when there is one block, so Phi is the identity
    let dir = tempfile::tempdir().unwrap();
    let r = run(dir.path(), &["scan", "--n", "3", "--blocks", "3", "--trials", "200", "--seed", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = bin();
    c.env("SUBDIAG_SEED", "77");
    let r = run_with(c, dir.path(), &["scan", "--n", "3", "--blocks", "3", "--trials", "10"]);
    assert_eq!(r.report.unwrap().seed, 77);
    let mut c = bin();
    c.env("SUBDIAG_SEED", "seventy");
    assert_eq!(run_with(c, dir.path(), &["scan", "--n", "3", "--trials", "10"]).code, 2);
}

#[test]
fn campaign_smoke_and_thread_independence() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["campaign", "--modules", "fkdet,algebra", "--trials", "100", "--seed", "3"];
    let one = run(dir.path(), &[&args[..], &["--threads", "1"]].concat());
    let three = run(dir.path(), &[&args[..], &["--threads", "3"]].concat());
    assert_eq!(one.code, 0, "{}", one.stderr);
    let (mut a, mut b) = (one.report.unwrap(), three.report.unwrap());
    assert_eq!(a.margins.len(), 13);
    a.results["wall_time"] = Value::Null;
    b.results["wall_time"] = Value::Null;
    assert_eq!(a, b);
}
