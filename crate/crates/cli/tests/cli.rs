use std::path::{Path, PathBuf};

use mtlmon_cli::run_cli;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mtlmon").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SKEWED_UNTIL: &str = r#"{"proc": "p1", "ts": 1, "kind": "local", "props": ["a"]}
{"proc": "p1", "ts": 4, "kind": "local"}
{"proc": "p2", "ts": 2, "kind": "local", "props": ["a"]}
{"proc": "p2", "ts": 5, "kind": "local", "props": ["b"]}
"#;

fn solver() -> String {
    std::env::var("MTLMON_SOLVER").unwrap_or_else(|_| "z3 -in".into())
}

#[test]
fn conforming_swap_passes() {
    let dir = TempDir::new().unwrap();
    let log = dir.path().join("swap.jsonl");
    let r = run(&["gen", "two-party", "--vector", "101010101010", "--delta", "10", "--out", s(&log)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let spec = dir.path().join("liveness.mtl");
    let r = run(&["gen", "spec", "liveness_2p", "--delta", "10"]);
    std::fs::write(&spec, r.stdout).unwrap();
    let r = run(&["--trace", s(&log), "--spec", s(&spec), "--epsilon", "1", "--segments", "1", "--engine", "enumerate"]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.starts_with("verdicts: {true}"), "{}", r.stdout);
}

#[test]
fn skewed_until_fails_with_both_verdicts() {
    let dir = TempDir::new().unwrap();
    let trace = write(dir.path(), "skewed_until.jsonl", SKEWED_UNTIL);
    let spec = write(dir.path(), "skewed_until.mtl", "a U[0,6) b\n");
    let r = run(&["--trace", s(&trace), "--spec", s(&spec), "--epsilon", "2", "--format", "json"]);
    assert_eq!(r.code, 1);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["verdicts"], serde_json::json!(["true", "false"]));
}

#[test]
fn skewed_until_with_solver() {
    let dir = TempDir::new().unwrap();
    let trace = write(dir.path(), "skewed_until.jsonl", SKEWED_UNTIL);
    let spec = write(dir.path(), "skewed_until.mtl", "a U[0,6) b\n");
    let emit = dir.path().join("smt");
    let cmd = solver();
    let r = run(&[
        "--trace",
        s(&trace),
        "--spec",
        s(&spec),
        "--epsilon",
        "2",
        "--engine",
        "smt",
        "--solver-cmd",
        &cmd,
        "--emit-smt",
        s(&emit),
    ]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    assert!(r.stdout.starts_with("verdicts: {true, false}"), "{}", r.stdout);
    assert!(std::fs::read_dir(&emit).unwrap().count() > 0);
}

#[test]
fn usage_errors() {
    let dir = TempDir::new().unwrap();
    let trace = write(dir.path(), "skewed_until.jsonl", SKEWED_UNTIL);
    let spec = write(dir.path(), "skewed_until.mtl", "a U[0,6) b\n");
    let r = run(&["--trace", s(&trace), "--spec", s(&spec), "--epsilon", "2", "--engine", "smt"]);
    assert_eq!(r.code, 64);
    assert!(r.stderr.contains("--solver-cmd"));
    assert_eq!(run(&["--spec", s(&spec), "--epsilon", "2"]).code, 64);
    assert_eq!(run(&["--trace", s(&trace), "--spec", s(&spec)]).code, 64);
    assert_eq!(run(&["--bogus"]).code, 64);
    assert_eq!(run(&["--trace", s(&trace), "--spec", s(&spec), "--epsilon", "2", "--branch-cap", "0"]).code, 64);
    assert_eq!(run(&["gen", "two-party", "--vector", "1010"]).code, 64);
    assert_eq!(run(&["gen", "spec", "nope"]).code, 64);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn input_errors() {
    let dir = TempDir::new().unwrap();
    let trace = write(dir.path(), "skewed_until.jsonl", SKEWED_UNTIL);
    let spec = write(dir.path(), "skewed_until.mtl", "a U[0,6) b\n");
    let missing = dir.path().join("missing.jsonl");
    let r = run(&["--trace", s(&missing), "--spec", s(&spec), "--epsilon", "2"]);
    assert_eq!(r.code, 66);
    let r = run(&["--trace", s(&trace), "--spec", s(&dir.path().join("none.mtl")), "--epsilon", "2"]);
    assert_eq!(r.code, 66);
    let bad_spec = write(dir.path(), "bad.mtl", "a U[0,6 b\n");
    let r = run(&["--trace", s(&trace), "--spec", s(&bad_spec), "--epsilon", "2"]);
    assert_eq!(r.code, 65);
    assert!(r.stderr.contains("bad.mtl:1:"), "{}", r.stderr);
    let bad_log = write(dir.path(), "bad.jsonl", "{\"proc\": \"p\", \"ts\": 3}\n");
    let r = run(&["--trace", s(&bad_log), "--spec", s(&spec), "--epsilon", "2"]);
    assert_eq!(r.code, 65);
    let r = run(&[
        "--trace",
        s(&trace),
        "--spec",
        s(&spec),
        "--epsilon",
        "2",
        "--engine",
        "smt",
        "--solver-cmd",
        "/nonexistent/solver",
    ]);
    assert_eq!(r.code, 69, "{}", r.stderr);
}

#[test]
fn truncated_run_exits_two() {
    let dir = TempDir::new().unwrap();
    let trace = write(
        dir.path(),
        "t.jsonl",
        "{\"proc\": \"p1\", \"ts\": 1, \"kind\": \"local\"}\n{\"proc\": \"p2\", \"ts\": 2, \"kind\": \"local\"}\n{\"proc\": \"p2\", \"ts\": 9, \"kind\": \"local\", \"props\": [\"b\"]}\n",
    );
    let spec = write(dir.path(), "t.mtl", "F[0,20) b\n");
    let base = ["--trace", s(&trace), "--spec", s(&spec), "--epsilon", "2", "--segments", "2", "--length", "10"];
    let full = run(&base);
    assert_eq!(full.code, 0, "{}", full.stdout);
    assert!(full.stdout.contains("F[0,18) b"));
    let mut capped = base.to_vec();
    capped.extend(["--branch-cap", "1"]);
    let r = run(&capped);
    assert_eq!(r.code, 2, "{}", r.stdout);
    assert!(r.stdout.contains("segment 1 (") && r.stdout.contains("truncated"));
}

#[test]
fn generators_write_files() {
    let dir = TempDir::new().unwrap();
    let grid = dir.path().join("grid");
    assert_eq!(run(&["gen", "grid", "--delta", "2", "--out", s(&grid)]).code, 0);
    assert_eq!(std::fs::read_dir(&grid).unwrap().count(), 1024);
    let r = run(&["gen", "random", "--seed", "7", "--processes", "2", "--events", "5"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout.lines().count(), 5);
    assert_eq!(r.stdout, run(&["gen", "random", "--seed", "7", "--processes", "2", "--events", "5"]).stdout);
    let r = run(&["gen", "three-party", "--vector", &"10".repeat(12)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout.lines().count(), 18);
    let r = run(&["gen", "auction", "--vector", "10101010"]);
    assert_eq!(r.code, 0);
    let r = run(&["gen", "spec"]);
    assert_eq!(r.stdout.lines().count(), 15);
}
