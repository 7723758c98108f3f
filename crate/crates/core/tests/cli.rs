use std::f64::consts::PI;
use std::path::Path;

use homolevel::cli::run;
use homolevel::moments::parse_body;
use homolevel::phf::parse_poly;
use serde_json::Value;

const DISK: &str = r#"{"n":2,"degree":2,"terms":[{"coeff":1.0,"exps":[2,0]},{"coeff":1.0,"exps":[0,2]}]}"#;
const DISK_REORDERED: &str = r#"{"n":2,"degree":2,"terms":[{"exps":[0,2],"coeff":1.0},{"exps":[2,0],"coeff":1.0}]}"#;
const QUARTIC: &str = r#"{"n":2,"degree":4,"terms":[{"coeff":1.0,"exps":[4,0]},{"coeff":0.5,"exps":[2,2]},{"coeff":2.0,"exps":[0,4]}]}"#;
const SADDLE: &str = r#"{"n":2,"degree":2,"terms":[{"coeff":1.0,"exps":[1,1]}]}"#;
const SQUARE: &str = r#"{"kind":"box","lo":[-1,-1],"hi":[1,1]}"#;

fn file(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn call(args: &[&str]) -> (i32, Value, String) {
    let out = run(std::iter::once("homolevel").chain(args.iter().copied()));
    let json = if out.stdout.trim().is_empty() { Value::Null } else { serde_json::from_str(&out.stdout).unwrap() };
    (out.code, json, out.stderr)
}

#[test]
fn vol_of_unit_disk() {
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "g.json", DISK);
    let (code, rep, _) = call(&["vol", "--g", &g]);
    assert_eq!(code, 0);
    assert_eq!(rep["command"], "vol");
    let v = rep["results"]["volume"].as_f64().unwrap();
    assert!((v - PI).abs() < 1e-12, "{v}");
    assert_eq!(rep["quadrature"]["method"], "sphere-product-gauss");
}

#[test]
fn identities_pass_on_a_quartic() {
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "g.json", QUARTIC);
    let (code, rep, _) = call(&["identities", "--g", &g, "--y", "0.8"]);
    assert_eq!(code, 0);
    assert_eq!(rep["results"]["all_pass"], true);
}

#[test]
fn minvol_inner_and_outer_on_the_square() {
    let dir = tempfile::tempdir().unwrap();
    let body = file(dir.path(), "k.json", SQUARE);
    let emitted = dir.path().join("g_out.json");
    let (code, inner, _) = call(&["minvol", "inner", "--k", "1", "--two-d", "2", "--body", &body]);
    assert_eq!(code, 0);
    let (code, outer, _) = call(&[
        "minvol",
        "outer",
        "--k",
        "1",
        "--two-d",
        "2",
        "--body",
        &body,
        "--kkt",
        "--emit-g",
        emitted.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let vi = inner["results"]["vol"].as_f64().unwrap();
    let vo = outer["results"]["vol"].as_f64().unwrap();
    assert!(vi <= vo);
    assert!((vo - 2.0 * PI).abs() < 1e-5);
    assert_eq!(outer["results"]["kkt"]["contact_count"], 4);

    let g = parse_poly(&std::fs::read_to_string(&emitted).unwrap()).unwrap();
    assert_eq!(g.degree(), 2);
    let direct = outer["results"]["g"].clone();
    let again: Value = serde_json::from_str(&std::fs::read_to_string(&emitted).unwrap()).unwrap();
    assert_eq!(direct, again);
}

#[test]
fn emitted_body_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let body = file(dir.path(), "k.json", r#"{"kind":"ball","center":[0.5,0],"radius":2}"#);
    let emitted = dir.path().join("canon.json");
    let (code, first, _) = call(&["moments", "--body", &body, "--degree", "2", "--emit-body", emitted.to_str().unwrap()]);
    assert_eq!(code, 0);
    let parsed = parse_body(&std::fs::read_to_string(&emitted).unwrap()).unwrap();
    assert_eq!(parsed.n(), 2);
    let (_, second, _) = call(&["moments", "--body", emitted.to_str().unwrap(), "--degree", "2"]);
    assert_eq!(first["results"], second["results"]);
    assert_eq!(first["inputs_digest"], second["inputs_digest"]);
}

#[test]
fn digest_ignores_term_order() {
    let dir = tempfile::tempdir().unwrap();
    let a = file(dir.path(), "a.json", DISK);
    let b = file(dir.path(), "b.json", DISK_REORDERED);
    let (_, ra, _) = call(&["vol", "--g", &a, "--y", "2"]);
    let (_, rb, _) = call(&["vol", "--g", &b, "--y", "2"]);
    assert_eq!(ra["inputs_digest"], rb["inputs_digest"]);
    let (_, rc, _) = call(&["vol", "--g", &b, "--y", "3"]);
    assert_ne!(ra["inputs_digest"], rc["inputs_digest"]);
}

#[test]
fn seeded_monte_carlo_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "g.json", QUARTIC);
    let args = ["nongauss", "--g", &g, "--method", "mc", "--nodes", "50000", "--seed", "21"];
    let (_, a, _) = call(&args);
    let (_, b, _) = call(&args);
    assert_eq!(serde_json::to_string(&a["results"]).unwrap(), serde_json::to_string(&b["results"]).unwrap());
    let (_, c, _) = call(&["nongauss", "--g", &g, "--method", "mc", "--nodes", "50000", "--seed", "22"]);
    assert_ne!(a["results"], c["results"]);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "g.json", DISK);
    let bad = file(dir.path(), "bad.json", "{not json");
    let (code, rep, err) = call(&["vol", "--g", &bad]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"));
    assert!(rep["error"].is_object() || rep["error"].is_string());
    assert_eq!(call(&["vol", "--g", "/nonexistent/g.json"]).0, 2);
    assert_eq!(call(&["vol", "--g", &g, "--nodes", "0"]).0, 2);
    assert_eq!(call(&["vol", "--g", &g, "--y", "-1"]).0, 2);
    assert_eq!(call(&["vol"]).0, 2);
}

#[test]
fn numerical_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "g.json", SADDLE);
    let (code, _, err) = call(&["vol", "--g", &g]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn eval_reports_value_and_gradient() {
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "g.json", QUARTIC);
    let (code, rep, _) = call(&["eval", "--g", &g, "--x", "1,-1"]);
    assert_eq!(code, 0);
    assert!((rep["results"]["value"].as_f64().unwrap() - 3.5).abs() < 1e-12);
}
