use std::process::{Command, Output};

use witt_core::ffield::make_field;

fn witt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_witt")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn canonicalize_w_degree_zero() {
    let o = witt(&["canonicalize", "--p", "5", "--space", "w", "--element", "0:3;1:1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["class"]["degree"], 0);
    assert_eq!(v["class"]["param"], "3");
    assert_eq!(v["input"], "0:3;1:1");
    assert!(v["checks"][0].as_str().unwrap().ends_with("true"));
}

#[test]
fn canonicalize_dual_height_three() {
    let o = witt(&["canonicalize", "--p", "5", "--space", "dual", "--element", "2:1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["class"]["height"], 3);
    assert_eq!(v["class"]["param"], "0");
}

#[test]
fn canonicalize_over_extension() {
    let o = witt(&["canonicalize", "--p", "5", "--ext", "2", "--space", "w", "--element", "1:g;2:1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["ext"], 2);
}

#[test]
fn exit_codes() {
    assert_eq!(witt(&["canonicalize", "--p", "5", "--space", "w", "--element", ""]).status.code(), Some(3));
    assert_eq!(witt(&["canonicalize", "--p", "5", "--space", "dual", "--element", ""]).status.code(), Some(3));
    assert_eq!(witt(&["canonicalize", "--p", "5", "--space", "w", "--element", "7:1"]).status.code(), Some(2));
    assert_eq!(witt(&["canonicalize", "--p", "5", "--space", "w", "--element", "0:x"]).status.code(), Some(2));
    assert_eq!(witt(&["canonicalize", "--p", "4", "--space", "w", "--element", "0:1"]).status.code(), Some(2));
    assert_eq!(witt(&["canonicalize", "--p", "5", "--space", "v", "--element", "0:1"]).status.code(), Some(2));
    assert_eq!(witt(&["verify", "--suite", "nope", "--p", "5"]).status.code(), Some(2));
    assert_eq!(witt(&["closure", "--p", "5", "--space", "w", "--i", "0", "--a", "0", "--test-point", "0:1"]).status.code(), Some(2));
}

#[test]
fn closure_polynomial_text() {
    let o = witt(&["closure", "--p", "7", "--space", "w", "--i", "1", "--a", "symbolic"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "X_2 - A*X_1^2");
    let o = witt(&["closure", "--p", "7", "--space", "w", "--i", "2", "--json"]);
    let v = json(&o);
    assert_eq!(v["i"], 2);
    assert_ne!(v["c"], 0);
}

#[test]
fn closure_membership_case_one() {
    // b e_0 with b^4 = -2 lies in the closure of G(e_-1 + 2 e_3); such b first appear in F_625
    let f = make_field(5, 4).unwrap();
    let minus_two = -f.from_i64(2);
    let b = f.elements().find(|b| b.pow(4) == minus_two).unwrap();
    let point = format!("0:{b}");
    let o = witt(&["closure", "--p", "5", "--ext", "4", "--space", "w", "--i", "-1", "--a", "2", "--test-point", &point]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "member");
    let o = witt(&["closure", "--p", "5", "--ext", "4", "--space", "w", "--i", "-1", "--a", "2", "--test-point", "0:1"]);
    assert_eq!(stdout(&o).trim(), "not a member");
}

#[test]
fn height_p_minus_one_is_gated() {
    let o = witt(&["closure", "--p", "5", "--space", "dual", "--height", "4"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("resolver"));

    let dir = std::env::temp_dir().join(format!("witt-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let report = dir.join("resolve5.json");
    let o = witt(&["resolve", "--p", "5", "--out", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["verified"], true);

    let rep = report.to_str().unwrap();
    let o = witt(&["closure", "--p", "5", "--space", "dual", "--height", "4", "--report", rep]);
    assert_eq!(o.status.code(), Some(0));
    let o = witt(&["closure", "--p", "5", "--space", "dual", "--height", "4", "--a", "0", "--report", rep, "--test-point", "0:1"]);
    assert_eq!(stdout(&o).trim(), "member");
    // a report for another prime does not unlock p = 7
    let o = witt(&["closure", "--p", "7", "--space", "dual", "--height", "6", "--report", rep]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn dual_closure_text() {
    let o = witt(&["closure", "--p", "7", "--space", "dual", "--height", "5", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["height"], 5);
    assert!(v["g"].as_str().unwrap().contains("A^2"));
}

fn without_elapsed(mut v: serde_json::Value) -> serde_json::Value {
    v.as_object_mut().unwrap().remove("elapsed_ms");
    v
}

#[test]
fn verify_is_deterministic_across_jobs() {
    let one = witt(&["verify", "--suite", "closures-w", "--p", "5"]);
    assert_eq!(one.status.code(), Some(0));
    let v = json(&one);
    assert_eq!(v["failures"], 0);
    assert!(v["points"].as_u64().unwrap() >= 3125);
    for jobs in ["1", "3"] {
        let again = witt(&["verify", "--suite", "closures-w", "--p", "5", "--jobs", jobs]);
        assert_eq!(without_elapsed(json(&again)), without_elapsed(v.clone()));
    }
}

#[test]
fn verify_sampled_suite_uses_seed() {
    let run = |seed: &str| json(&witt(&["verify", "--suite", "witt-core", "--p", "11", "--seed", seed, "--jobs", "2"]));
    let a = run("7");
    assert_eq!(a["exhaustive"], false);
    assert_eq!(a["failures"], 0);
    assert_eq!(without_elapsed(run("7")), without_elapsed(a));
}

#[test]
fn verify_writes_report_file() {
    let path = std::env::temp_dir().join(format!("witt-verify-{}.json", std::process::id()));
    let o = witt(&["verify", "--suite", "height-p1", "--p", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written, json(&o));
    assert_eq!(written["payload"]["branch"], "B");
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn wlambda_exhaustive_f5() {
    let o = witt(&["verify", "--suite", "wlambda", "--p", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["field"], "F_5");
    assert_eq!(v["exhaustive"], true);
    assert_eq!(v["points"], 3125);
}
