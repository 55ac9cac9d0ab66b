use std::path::Path;
use std::process::{Command, Output};

use contensor::{io, kernels, Value};

fn ctc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scalar(json: &str) -> Value {
    io::load_str(json).unwrap().values[0]
}

#[test]
fn shipped_kernels_run_with_their_fixtures() {
    let o = ctc(&["run", "--kernel", "dot-integral"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(scalar(&stdout(&o)).same(Value::Num(3.0)));
    let o = ctc(&["run", "--kernel", "dot_sum", "--stats"]);
    assert!(scalar(&stdout(&o)).same(Value::Num(44.0)));
    let stats: serde_json::Value = serde_json::from_str(stderr(&o).lines().next().unwrap()).unwrap();
    assert_eq!(stats["multiplies"], 2);
}

#[test]
fn corpus_check_passes() {
    let o = ctc(&["check", "--corpus", "--instances", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn missing_bindings_are_user_errors() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("p.ct");
    std::fs::write(&src, "for i = -∞:∞\n  s += x[i] * y[i] * d(i)\nend\n").unwrap();
    let o = ctc(&["run", "--program", src.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains('x'), "{}", stderr(&o));
}

#[test]
fn invalid_programs_name_the_rule() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.json");
    io::save(&kernels::f_x(), &x).unwrap();
    let src = dir.path().join("p.ct");
    std::fs::write(&src, "for i = -∞:∞\n  s += x[i]\nend\n").unwrap();
    let o = ctc(&["run", "--program", src.to_str().unwrap(), "--bind", &format!("x={}", x.display())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("R-SUM"), "{}", stderr(&o));
}

#[test]
fn exported_instances_run_with_explicit_bindings() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = ctc(&["export", "--kernel", "dot_integral", "--dir", d]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ct = Path::new(d).join("dot_integral.ct");
    let (x, y) = (Path::new(d).join("x.json"), Path::new(d).join("y.json"));
    let out = Path::new(d).join("s.json");
    let o = ctc(&[
        "run",
        "--program",
        ct.to_str().unwrap(),
        "--bind",
        &format!("x={}", x.display()),
        "--bind",
        &format!("y={}", y.display()),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(io::load(&out).unwrap().values[0].same(Value::Num(3.0)));
}

#[test]
fn parameters_override_the_fixture() {
    let o = ctc(&["run", "--kernel", "radius_search", "--param", "R=0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = io::load_str(&stdout(&o)).unwrap();
    let inside: Vec<bool> = t.values.iter().map(|v| v.truthy()).collect();
    assert_eq!(inside, [false, true, false, false, false]);
    let o = ctc(&["run", "--kernel", "radius_search", "--param", "R=wide"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dumps_show_each_stage() {
    let o = ctc(&["dump", "--kernel", "dot_integral", "--ir", "looplets"]);
    assert!(stdout(&o).contains("Stepper"), "{}", stdout(&o));
    let raw = stdout(&ctc(&["dump", "--kernel", "dot_integral", "--ir", "plan"]));
    let simplified = stdout(&ctc(&["dump", "--kernel", "dot_integral", "--ir", "post-simplify"]));
    assert!(!raw.is_empty() && !simplified.is_empty());
    assert!(simplified.len() <= raw.len());
}

#[test]
fn bench_reports_json() {
    let o = ctc(&["bench", "--grid", "--n", "20", "--m", "200", "--runs", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["runs_ms"].as_array().unwrap().len(), 2);
    assert!(j["median_ms"].as_f64().unwrap() >= 0.0);
}
