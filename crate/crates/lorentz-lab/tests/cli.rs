//! End-to-end tests of the command-line surface: flag grammar, report
//! schema, exit codes, determinism, and the CSV export.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lorentz-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn norm_of_char_against_char_weight_is_one() {
    let out = run(&[
        "norm",
        "--space",
        "lambda",
        "--p",
        "1",
        "--weight",
        r#"{"kind":"char","a":0,"b":1}"#,
        "--function",
        r#"{"kind":"step","breakpoints":[1],"values":[1]}"#,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["schema"], "lorentz-lab/1");
    assert_eq!(v["command"], "norm");
    assert!((v["result"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["result"]["diverged"], false);
    // the config used is embedded
    assert!(v["config"]["points_per_decade"].as_u64().is_some());
}

#[test]
fn certify_rp_on_unit_block() {
    let out = run(&[
        "certify",
        "--class",
        "rp",
        "--p",
        "1",
        "--weight",
        r#"{"kind":"char","a":0,"b":1}"#,
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["result"]["verdict"], "member");
    let c = v["result"]["observed_constant"].as_f64().unwrap();
    assert!((c - 1.0).abs() < 0.01, "constant {c}");
}

#[test]
fn gallery_single_scenario_passes() {
    let out = run(&["gallery", "char01-r1-not-b1", "--format", "text"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("pass"), "{text}");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = [
        "certify",
        "--class",
        "bp",
        "--p",
        "2",
        "--weight",
        r#"{"kind":"power","gamma":0.5}"#,
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malformed_spec_exits_2_with_pointer() {
    let out = run(&[
        "norm",
        "--space",
        "lambda",
        "--p",
        "1",
        "--weight",
        r#"{"kind":"power","gama":1}"#,
        "--function",
        r#"{"kind":"step","breakpoints":[1],"values":[1]}"#,
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gama") || err.contains("weight spec"), "{err}");
}

#[test]
fn usage_error_exits_2() {
    let out = run(&["norm", "--space", "lambda"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_verdict_exits_1() {
    let out = run(&[
        "check",
        "--relation",
        "sandwich",
        "--weight",
        r#"{"kind":"const","c":1}"#,
        "--v",
        r#"{"kind":"char","a":0,"b":1}"#,
        "--q",
        "2",
        "--grid-min",
        "1e-3",
        "--grid-max",
        "1e3",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["result"]["status"]["status"], "fails");
}

#[test]
fn eqwv_check_holds_and_exports_csv() {
    let common = [
        "check",
        "--relation",
        "eqwv",
        "--weight",
        r#"{"kind":"char","a":0,"b":1}"#,
        "--v",
        r#"{"kind":"logpoly","coeffs":[1.3862943611198906,1.0],"gamma":-2.0,"a":0.25,"b":0.5}"#,
        "--grid-min",
        "1e-2",
        "--grid-max",
        "1e2",
    ];
    let out = run(&common);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut csv_args = common.to_vec();
    csv_args.extend(["--format", "csv"]);
    let out = run(&csv_args);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,value"));
    assert!(lines.count() > 100);
}

#[test]
fn construct_wq_emits_tabulated_weight_and_verification() {
    let out = run(&[
        "construct-wq",
        "--weight",
        r#"{"kind":"exp","rate":1.0}"#,
        "--q",
        "2",
        "--grid-min",
        "1e-3",
        "--grid-max",
        "1e3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["result"]["w_q"]["kind"], "tabulated");
    assert_eq!(v["result"]["verification"]["pass"], true);
    let lo = v["result"]["verification"]["lower"].as_f64().unwrap();
    let hi = v["result"]["verification"]["upper"].as_f64().unwrap();
    assert!(lo > 1.0 - 1e-6 && hi < 1.0 + 1e-6, "[{lo}, {hi}]");
}

#[test]
fn equiv_norm_reports_the_case() {
    let out = run(&["equiv-norm", "--weight", r#"{"kind":"const","c":1}"#]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["result"]["case"], "lebesgue-l1");
}
