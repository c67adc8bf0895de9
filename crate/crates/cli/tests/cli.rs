use std::io::Write;
use std::process::{Command, Output, Stdio};

use jsccsj_cli::spec_file::{emit, parse, SpecError};

fn jsccsj(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_jsccsj"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    if let Some(text) = stdin {
        child
            .stdin
            .take()
            .unwrap()
            .write_all(text.as_bytes())
            .unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn trailer<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

fn binary_file() -> String {
    stdout(&jsccsj(
        &["example", "binary", "--p", "0.1", "--pj", "0.2"],
        None,
    ))
}

#[test]
fn binary_example_validates_and_matches() {
    let file = binary_file();
    let v = jsccsj(&["validate", "-"], Some(&file));
    assert!(v.status.success(), "{}", stderr(&v));
    let out = jsccsj(&["check-matched", "-"], Some(&file));
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(trailer(&text, "verdict"), Some("MATCHED"));
    let b1: f64 = trailer(&text, "b1").unwrap().parse().unwrap();
    assert!((b1 - 1.0 / (0.74f64 / 0.26).ln()).abs() < 1e-9);
    let c1: f64 = trailer(&text, "c1").unwrap().parse().unwrap();
    assert!((c1 - 1.25).abs() < 1e-9);
}

#[test]
fn half_noise_is_degenerate_for_distortion() {
    let file = stdout(&jsccsj(
        &["example", "binary", "--p", "0.5", "--pj", "0.2"],
        None,
    ));
    let text = stdout(&jsccsj(&["check-matched", "-"], Some(&file)));
    assert_eq!(trailer(&text, "verdict_distortion"), Some("DEGENERATE"));
    assert_eq!(trailer(&text, "verdict"), Some("NOT MATCHED"));
}

#[test]
fn asymmetric_channel_fails_user_cost_condition() {
    let file = binary_file().replacen(
        "\"0\": {\n      \"0\": {\n        \"0\": \"0.90000000000000002\",\n        \"1\": \"0.10000000000000001\"",
        "\"0\": {\n      \"0\": {\n        \"0\": \"0.7\",\n        \"1\": \"0.3\"",
        1,
    );
    assert!(file.contains("\"0.7\""), "fixture edit did not apply");
    let text = stdout(&jsccsj(&["check-matched", "-"], Some(&file)));
    assert_eq!(trailer(&text, "verdict"), Some("NOT MATCHED"));
    assert!(trailer(&text, "failed").unwrap().contains("user_cost"));
}

#[test]
fn nash_verify_binary_and_lary() {
    let text = stdout(&jsccsj(
        &["nash-verify", "-", "--block-n", "2"],
        Some(&binary_file()),
    ));
    assert_eq!(trailer(&text, "value"), Some("0.26"));
    assert_eq!(trailer(&text, "verdict"), Some("EQUILIBRIUM"));
    let lary = stdout(&jsccsj(
        &["example", "lary", "--L", "3", "--p", "0.1", "--pj", "0.2"],
        None,
    ));
    let text = stdout(&jsccsj(&["nash-verify", "-"], Some(&lary)));
    assert_eq!(trailer(&text, "verdict"), Some("EQUILIBRIUM"));
}

#[test]
fn deviated_jammer_is_not_equilibrium() {
    let mut spec = parse(&binary_file()).unwrap();
    let f = spec.finite.as_mut().unwrap();
    let p = f.profile.as_mut().unwrap();
    p.jammer = jsccsj_core::CondKernel::new(vec![vec![0.9, 0.1], vec![0.9, 0.1]]).unwrap();
    let text = stdout(&jsccsj(&["nash-verify", "-"], Some(&emit(&spec))));
    assert_eq!(trailer(&text, "verdict"), Some("NOT EQUILIBRIUM"));
    let gap: f64 = trailer(&text, "jammer_gap").unwrap().parse().unwrap();
    assert!((gap - 0.08).abs() < 1e-9);
}

#[test]
fn deq_curve_binary() {
    let out = jsccsj(
        &["deq-curve", "-", "--grid", "0:0.5:0.1"],
        Some(&binary_file()),
    );
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    let expect = [0.10, 0.18, 0.26, 0.34, 0.42, 0.50];
    assert_eq!(rows.len(), 6);
    for ((_, d), e) in rows.iter().zip(expect) {
        assert!((d - e).abs() < 1e-9);
    }
    assert!(text.starts_with("P_J,D\n"));
    assert!(text.contains("# linear=true"));
}

#[test]
fn deq_curve_marks_infeasible_and_rejects_empty_grid() {
    let text = stdout(&jsccsj(
        &["deq-curve", "-", "--grid=-0.1:0.1:0.1"],
        Some(&binary_file()),
    ));
    assert!(text.contains("-0.1,INFEASIBLE"), "{text}");
    let out = jsccsj(
        &["deq-curve", "-", "--grid", "0.5:0:0.1"],
        Some(&binary_file()),
    );
    assert!(!out.status.success());
    let out = jsccsj(&["deq-curve", "-", "--grid", "0:1:0"], Some(&binary_file()));
    assert!(!out.status.success());
}

#[test]
fn simulate_is_deterministic_across_thread_counts() {
    let file = binary_file();
    let run = |threads: &str| {
        let mut child = Command::new(env!("CARGO_BIN_EXE_jsccsj"))
            .args([
                "simulate", "-", "--seed", "42", "--blocks", "20000", "--n", "3",
            ])
            .env("JSCCSJ_THREADS", threads)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .unwrap();
        child
            .stdin
            .take()
            .unwrap()
            .write_all(file.as_bytes())
            .unwrap();
        child.wait_with_output().unwrap().stdout
    };
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("4"));
}

#[test]
fn gaussian_example_simulates_near_half() {
    let file = stdout(&jsccsj(
        &[
            "example", "gaussian", "--pu", "1", "--sigma2", "1", "--pj", "0",
        ],
        None,
    ));
    let text = stdout(&jsccsj(
        &["simulate", "-", "--seed", "3", "--blocks", "200000"],
        Some(&file),
    ));
    let mean: f64 = trailer(&text, "distortion").unwrap().parse().unwrap();
    let se: f64 = trailer(&text, "distortion_se").unwrap().parse().unwrap();
    assert!((mean - 0.5).abs() <= 4.0 * se);
}

#[test]
fn lary_two_equals_binary() {
    let lary = stdout(&jsccsj(
        &["example", "lary", "--L", "2", "--p", "0.1", "--pj", "0.2"],
        None,
    ));
    assert_eq!(lary, binary_file());
}

#[test]
fn examples_round_trip() {
    for args in [
        vec!["example", "binary", "--p", "0.1", "--pj", "0.2"],
        vec!["example", "lary", "--L", "4", "--p", "0.3", "--pj", "0.1"],
        vec![
            "example", "gaussian", "--pu", "2", "--sigma2", "0.5", "--pj", "0.7",
        ],
    ] {
        let first = stdout(&jsccsj(&args, None));
        let again = emit(&parse(&first).unwrap());
        assert_eq!(first, again);
    }
}

#[test]
fn out_of_range_example_fails() {
    let out = jsccsj(&["example", "binary", "--p", "0.7", "--pj", "0.2"], None);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("0.7"));
}

#[test]
fn bad_row_is_named() {
    let file = binary_file().replacen("\"0.90000000000000002\"", "\"0.8\"", 1);
    let out = jsccsj(&["validate", "-"], Some(&file));
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("channel[\"0\"][\"0\"]"), "{err}");
    assert!(err.contains("sum to 0.9"), "{err}");
}

#[test]
fn undeclared_symbol_is_named() {
    let file = binary_file().replacen(
        "\"1\": \"0.10000000000000001\"",
        "\"2\": \"0.10000000000000001\"",
        1,
    );
    let out = jsccsj(&["validate", "-"], Some(&file));
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("undeclared symbol \"2\""), "{err}");
}

#[test]
fn syntax_errors_report_position() {
    match parse("{\n  \"schema_version\": 1,\n  oops\n}") {
        Err(SpecError::Syntax { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    let out = jsccsj(&["validate", "-"], Some("{"));
    assert!(!out.status.success());
    assert!(stderr(&out).contains("line"));
}

#[test]
fn missing_profile_and_missing_file() {
    let mut spec = parse(&binary_file()).unwrap();
    spec.finite.as_mut().unwrap().profile = None;
    let out = jsccsj(&["check-matched", "-"], Some(&emit(&spec)));
    assert!(!out.status.success());
    assert!(stderr(&out).contains("profile"));
    let out = jsccsj(&["validate", "/nonexistent/file.json"], None);
    assert!(!out.status.success());
}

#[test]
fn numbers_accept_json_numbers() {
    let file = binary_file().replace("\"0.50000000000000000\"", "0.5");
    let spec = parse(&file).unwrap();
    assert_eq!(emit(&spec), binary_file());
}

#[test]
fn wrong_schema_version_rejected() {
    let file = binary_file().replacen("\"schema_version\": 1", "\"schema_version\": 2", 1);
    match parse(&file) {
        Err(SpecError::Invalid(d)) => assert_eq!(d[0].path, "schema_version"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("jsccsj-out-{}.json", std::process::id()));
    let out = jsccsj(
        &[
            "example",
            "binary",
            "--p",
            "0.1",
            "--pj",
            "0.2",
            "--out",
            path.to_str().unwrap(),
        ],
        None,
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), binary_file());
    let _ = std::fs::remove_file(path);
}
