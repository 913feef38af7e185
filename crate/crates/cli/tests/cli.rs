use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sato2d::d1::D1Op;
use sato2d::eplus::EPlusOp;
use sato2d::gallery::cusp_operators;
use sato2d::rat::rat;
use sato2d::schur::{toric_a, toric_w};
use sato2d::action::Bounds;
use sato2d::zseries::ZSeries;
use serde::Serialize;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sato2d"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write<T: Serialize>(dir: &Path, name: &str, v: &T) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn statuses(v: &Value) -> Vec<String> {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["status"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn cusp_example_passes() {
    let o = run(&["example", "cusp", "--prec", "12"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(statuses(&v).iter().all(|s| s == "pass"), "{v}");
}

#[test]
fn toric_example_is_reproducible() {
    let a = run(&["example", "toric"]);
    let b = run(&["example", "toric"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(statuses(&v).iter().all(|s| s == "pass"), "{v}");
}

#[test]
fn commuting_products_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let d1 = EPlusOp::monomial(D1Op::d1_pow(1, 8), 0, -4);
    let p = d1.mul(&EPlusOp::d2_pow(1, 8, -4)).add(&EPlusOp::d2_pow(-1, 8, -4));
    let q = d1.mul(&d1).add(&EPlusOp::d2_pow(2, 8, -4));
    let pa = write(dir.path(), "p.json", &p);
    let qa = write(dir.path(), "q.json", &q);
    let pq = dir.path().join("pq.json");
    let qp = dir.path().join("qp.json");
    // precision bounds depend on the order of the factors; --prec caps both
    assert!(run(&["mul", s(&pa), s(&qa), "--prec", "5", "-o", s(&pq)]).status.success());
    assert!(run(&["mul", s(&qa), s(&pa), "--prec", "5", "-o", s(&qp)]).status.success());
    assert_eq!(std::fs::read(&pq).unwrap(), std::fs::read(&qp).unwrap());
    let o = run(&["commutator", s(&pa), s(&qa)]);
    let c: EPlusOp = serde_json::from_slice(&o.stdout).unwrap();
    assert!(c.is_zero());
}

#[test]
fn malformed_json_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"window_lo\": -2,\n \"slots\": [").unwrap();
    let o = run(&["mul", s(&bad), s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
    let o = run(&["mul", "/nonexistent/a.json", "/nonexistent/b.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn math_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", &EPlusOp::d2_pow(3, 6, -3));
    let o = run(&["root", s(&p), "-k", "2"]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn square_root_of_the_cusp_operator() {
    let dir = tempfile::tempdir().unwrap();
    let (p, _) = cusp_operators(6, -4);
    let pa = write(dir.path(), "p.json", &p);
    let o = run(&["root", s(&pa), "-k", "2"]);
    assert!(o.status.success());
    let r: EPlusOp = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r.mul(&r).agrees_with(&p));
}

#[test]
fn psi1_and_schur_validation() {
    let dir = tempfile::tempdir().unwrap();
    let z = write(dir.path(), "z.json", &ZSeries::monomial(1, -1, rat(1)));
    let o = run(&["psi1", s(&z)]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["terms"], serde_json::json!([[1, -2, "1"]]));

    let a = write(dir.path(), "a.json", &toric_a());
    let w = write(dir.path(), "w.json", &toric_w(Bounds::triangle(4)));
    let o = run(&["validate-schur", s(&a), s(&w), "--cutoff", "4"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rank_r"], 1);
    assert!(statuses(&v).iter().all(|s| s == "pass"), "{v}");

    let o = run(&["invariants", s(&a), "--cutoff", "3"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n_a"], 1);
    assert_eq!(v["strongly_admissible"], true);
}

#[test]
fn growth_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let (p, _) = cusp_operators(8, -4);
    let pa = write(dir.path(), "p.json", &p);
    let o = run(&["check-condition", s(&pa), "--kind", "a", "--alpha", "1"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "pass");
    let o = run(&["check-condition", s(&pa), "--anchor", "oops"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn baker_akhiezer_of_d2_squared() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t.json", &EPlusOp::d2_pow(2, 6, -2));
    let o = run(&["ba", s(&t)]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let terms = v["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!((terms[0]["i"].as_i64(), terms[0]["j"].as_i64()), (Some(0), Some(-2)));
}
