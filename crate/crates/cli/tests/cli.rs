use std::path::PathBuf;
use std::process::Command;

use qoper_cli::{run, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn call(args: &[&str], stdin: &str) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut input = stdin.as_bytes();
    let argv = std::iter::once("qoper").chain(args.iter().copied());
    let code = run(argv, &mut input, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qoper-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn solve_fixture_contains_five_eighths() {
    let (code, out, _) = call(&["solve", &data("sl2.json")], "");
    assert_eq!(code, EXIT_PASS);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["command"], "solve");
    assert_eq!(v["pass"], true);
    let re = v["details"]["u"][0][0][0].as_f64().unwrap();
    assert!((re - 0.625).abs() < 1e-12);
    assert!(out.contains("0.625"));
}

#[test]
fn solve_then_verify_and_reconstruct() {
    for f in ["sl2.json", "sl3.json"] {
        let (code, out, _) = call(&["solve", &data(f)], "");
        assert_eq!(code, EXIT_PASS);
        let v: Value = serde_json::from_str(&out).unwrap();
        let roots = tmp(&format!("{f}.roots"));
        std::fs::write(&roots, v["details"].to_string()).unwrap();
        let (code, out, _) = call(&["verify", &data(f), roots.to_str().unwrap()], "");
        assert_eq!(code, EXIT_PASS, "{out}");
        let (code, out, _) = call(&["reconstruct", &data(f), roots.to_str().unwrap()], "");
        assert_eq!(code, EXIT_PASS, "{out}");
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!(v["details"]["stages"].as_array().unwrap().iter().all(|s| s["pass"] == true));
    }
}

#[test]
fn tampered_root_fails_verification() {
    let (code, out, _) = call(&["verify", &data("sl2.json"), "-"], r#"{"u": [[[0.626, 0.0]]]}"#);
    assert_eq!(code, EXIT_FAIL);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["pass"], false);
    assert!(v["details"]["residual"]["max_abs"].as_f64().unwrap() > 1e-6);
}

#[test]
fn input_errors_exit_two() {
    let (code, _, err) = call(&["solve", "-"], r#"{"N": 2, "sqrt_q": [2.0, 0.0]}"#);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("input error"));
    let (code, _, _) = call(&["solve", "/nonexistent/problem.json"], "");
    assert_eq!(code, EXIT_INPUT);
    let (code, _, _) = call(&["verify", &data("sl2.json"), "-"], r#"{"u": [[]]}"#);
    assert_eq!(code, EXIT_INPUT);
    let (code, _, _) = call(&["solve", &data("sl2.json"), "--tol", "-1"], "");
    assert_eq!(code, EXIT_INPUT);
    let (code, _, _) = call(&["frobnicate"], "");
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn pointer_in_schema_errors() {
    let bad = r#"{"N": 2, "sqrt_q": [2.0, 0.0], "kappa": [[0.5, 0.0], [2.0, 0.0]], "punctures": [{"z": [1.0, 0.0], "weights": [1, 1]}], "r": [1]}"#;
    let (code, out, _) = call(&["solve", "-"], bad);
    assert_eq!(code, EXIT_INPUT);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["details"]["error"].as_str().unwrap().contains("/punctures/0/weights"), "{out}");
}

#[test]
fn stdin_and_out_flag() {
    let text = std::fs::read_to_string(data("ktheory.json")).unwrap();
    let target = tmp("ktheory.out.json");
    let (code, out, _) = call(&["ktheory", "-", "--out", target.to_str().unwrap()], &text);
    assert_eq!(code, EXIT_PASS);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(v["command"], "ktheory");
    assert_eq!(v["details"]["degree"], 2);
}

#[test]
fn limits_report_first_order() {
    let (code, out, _) = call(&["limits", &data("limits.json")], "");
    assert_eq!(code, EXIT_PASS);
    let v: Value = serde_json::from_str(&out).unwrap();
    for r in v["details"]["xxz_ratios"].as_array().unwrap() {
        assert!((r.as_f64().unwrap() - 2.0).abs() < 0.4);
    }
}

#[test]
fn selftest_passes() {
    let (code, out, _) = call(&["selftest"], "");
    assert_eq!(code, EXIT_PASS, "{out}");
}

#[test]
fn binary_output_is_byte_identical() {
    let exe = env!("CARGO_BIN_EXE_qoper");
    for args in [vec!["solve", "sl3.json", "--seed", "7"], vec!["limits", "limits.json"], vec!["ktheory", "ktheory.json"]] {
        let argv: Vec<String> = args.iter().map(|a| if a.ends_with(".json") { data(a) } else { a.to_string() }).collect();
        let a = Command::new(exe).args(&argv).output().unwrap();
        let b = Command::new(exe).args(&argv).output().unwrap();
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
}
