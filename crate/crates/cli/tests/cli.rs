use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn scenagg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scenagg")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = scenagg(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn gen_example1(dir: &Path) -> String {
    let path = dir.join("e.inst");
    let p = path.to_str().unwrap().to_string();
    ok(&["gen", "example1", "-o", &p]);
    p
}

#[test]
fn gen_writes_files_and_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.inst");
    ok(&["gen", "tight", "--k", "4", "--ell", "2", "-o", t.to_str().unwrap()]);
    let text = std::fs::read_to_string(&t).unwrap();
    assert!(text.contains("structure parallel 16 16"));
    assert!(text.contains("scenarios 16 32"));

    let e = std::fs::read_to_string(gen_example1(dir.path())).unwrap();
    assert!(e.contains("structure parallel 1 1 1"));

    let minimal = ok(&["gen", "layered", "--layers", "1", "--width", "1", "--k", "1", "--seed", "7"]);
    assert!(minimal.starts_with("scenagg-instance 1"));
    assert!(minimal.contains("scenarios 1 2"));
}

#[test]
fn solve_example1() {
    let dir = tempfile::tempdir().unwrap();
    let e = gen_example1(dir.path());
    let r = json(&["solve", &e, "--criterion", "regret", "--method", "exact", "--json"]);
    assert_eq!(r["value"], 1.0);
    assert_eq!(r["solution"], serde_json::json!([1]));
    let r = json(&["solve", &e, "--criterion", "minmax", "--method", "brute", "--json"]);
    assert_eq!(r["value"], 1.0);
    let r = json(&["solve", &e, "--method", "fptas", "--eps-tilde", "0.5", "--json"]);
    assert!(r["value"].as_f64().unwrap() <= 1.5);
    assert!(ok(&["solve", &e]).contains("value: 1"));
}

#[test]
fn single_scenario_minmax_is_nominal() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.inst");
    std::fs::write(&p, "scenagg-instance 1\nstructure selection 3 2\nscenarios 1 3\n0.5 0.25 2\n").unwrap();
    let r = json(&["solve", p.to_str().unwrap(), "--json"]);
    assert_eq!(r["value"], 0.75);
    let c = json(&["approx", p.to_str().unwrap(), "--epsilon", "0.3", "--json"]);
    assert_eq!(c["guarantee_factor"], 1.0);
}

#[test]
fn approx_reports_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let e = gen_example1(dir.path());
    let c = json(&["approx", &e, "--epsilon", "1", "--criterion", "regret", "--sub-solver", "exact", "--json"]);
    assert_eq!(c["solution"], serde_json::json!([1]));
    assert_eq!(c["achieved_value"], 1.0);
    assert_eq!(c["guarantee_factor"], 2.0);

    let t = dir.path().join("t.inst");
    ok(&["gen", "tight", "--k", "4", "--ell", "2", "-o", t.to_str().unwrap()]);
    let t = t.to_str().unwrap();
    let c = json(&["approx", t, "--level", "2", "--sub-solver", "adversarial", "--json"]);
    let opt = json(&["solve", t, "--method", "brute", "--json"])["value"].as_f64().unwrap();
    assert_eq!(c["achieved_value"].as_f64().unwrap() / opt, 4.0);
}

#[test]
fn experiment_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let svg = dir.path().join("r.svg");
    let out = ok(&[
        "experiment", "--layers", "3", "--width", "2", "--k", "4", "--instances", "3", "--csv",
        csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(), "--summary", "--sequential",
    ]);
    assert!(out.contains("similarity") && out.contains("consecutive"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("instance_id,scheme,scenario_count,value,opt_value,ratio,wall_time_ms,status"));
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 3);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn exit_codes() {
    assert_eq!(scenagg(&["--help"]).status.code(), Some(0));
    assert_eq!(scenagg(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(scenagg(&["gen", "layered", "--layers", "2"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let e = gen_example1(dir.path());
    assert_eq!(scenagg(&["approx", &e, "--epsilon", "1.5"]).status.code(), Some(2));
    assert_eq!(scenagg(&["gen", "layered", "--layers", "0", "--width", "2", "--k", "1"]).status.code(), Some(2));
    assert_eq!(scenagg(&["solve", "/nonexistent/file.inst"]).status.code(), Some(2));

    let bad = dir.path().join("bad.inst");
    std::fs::write(&bad, "scenagg-instance 1\nstructure selection 2 1\nscenarios 1 2\n1 -2\n").unwrap();
    let out = scenagg(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let big = dir.path().join("big.inst");
    ok(&["gen", "layered", "--layers", "12", "--width", "4", "--k", "2", "-o", big.to_str().unwrap()]);
    assert_eq!(scenagg(&["solve", big.to_str().unwrap(), "--method", "brute"]).status.code(), Some(3));
}
