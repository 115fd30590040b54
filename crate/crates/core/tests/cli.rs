use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn balsys(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_balsys")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = balsys(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{args:?}: {e}; stdout {:?} stderr {:?}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    });
    (out.status.code().unwrap(), v)
}

fn file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const STAR: &str = "# S*2 over F_5\n5 2 5\n1 1 0 0 3\n0 0 1 1 3\n";
const W7: &str = "7 2 5\n1 6 6 1 0\n1 0 5 0 1\n";

fn full_space(q: u64, n: u32) -> String {
    let mut out = format!("{q} {n}\n");
    for idx in 0..q.pow(n) {
        let mut v = Vec::new();
        let mut r = idx;
        for _ in 0..n {
            v.push((r % q).to_string());
            r /= q;
        }
        out += &(v.join(" ") + "\n");
    }
    out
}

#[test]
fn classify_star_and_w() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v) = json(&["classify", "-A", s(&file(dir.path(), "star.txt", STAR))]);
    assert_eq!(code, 0);
    assert_eq!(v["type_rc"], true);
    assert_eq!(v["thm_a"], "(i)");
    assert_eq!(v["thm_b"], "(i)");
    assert_eq!(v["moderate"], "proven");
    let (code, v) = json(&["classify", "-A", s(&file(dir.path(), "w.txt", W7))]);
    assert_eq!(code, 0);
    assert_eq!(v["type_rc"], false);
    assert_eq!(v["thm_a"], "none");
}

#[test]
fn classify_reports_zero_columns() {
    let dir = tempfile::tempdir().unwrap();
    let emitted = balsys(&["catalog", "emit", "--name", "S3", "--q", "2"]);
    assert!(emitted.status.success());
    let a = file(dir.path(), "s3.txt", &String::from_utf8(emitted.stdout).unwrap());
    let (code, v) = json(&["classify", "-A", s(&a)]);
    assert_eq!(code, 0);
    assert_eq!(v["profile"]["zero_columns"].as_array().unwrap().len(), 3);
    assert_eq!(v["thm_a"], "(ii)");
    assert!(!v["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn find_shape_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let a = file(dir.path(), "star.txt", STAR);
    let full = file(dir.path(), "f5.txt", &full_space(5, 2));
    let (code, v) = json(&["find", "shape", "-A", s(&a), "-S", s(&full)]);
    assert_eq!(code, 4);
    assert_eq!(v["outcome"], "below_threshold");
    let (code, v) = json(&["find", "shape", "-A", s(&a), "-S", s(&full), "--override-threshold"]);
    assert_eq!(code, 0);
    assert_eq!(v["outcome"], "found");
    assert_eq!(v["certificate"]["flags"]["shape"], true);
    let tiny = file(dir.path(), "tiny.txt", "5 2\n0 0\n1 1\n");
    let (code, v) = json(&["find", "nontrivial", "-A", s(&a), "-S", s(&tiny)]);
    assert_eq!(code, 3);
    assert_eq!(v["outcome"], "exhausted");
}

#[test]
fn find_generic_and_high_rank() {
    let dir = tempfile::tempdir().unwrap();
    let a = file(dir.path(), "star.txt", STAR);
    let full = file(dir.path(), "f5.txt", &full_space(5, 2));
    for kind in ["generic", "highrank"] {
        let (code, v) = json(&["find", kind, "-A", s(&a), "-S", s(&full), "--override-threshold"]);
        assert_eq!(code, 0, "{kind}: {v}");
        assert!(v["certificate"]["affine_dim"].as_u64().unwrap() >= 2);
    }
}

#[test]
fn wshape_in_characteristic_two_is_not_applicable() {
    let dir = tempfile::tempdir().unwrap();
    let f4 = file(dir.path(), "f4.txt", "2^2 1\n0\n1\n2\n3\n");
    let (code, v) = json(&["find", "wshape", "-S", s(&f4)]);
    assert_eq!(code, 4);
    assert_eq!(v["outcome"], "not_applicable");
}

#[test]
fn constants_thresholds() {
    let (code, v) = json(&["constants", "--q", "3", "--k", "3", "--n", "6"]);
    assert_eq!(code, 0);
    assert_eq!(v["thresholds"]["pigeonhole"], "243");
    let g = v["gamma"]["value"].as_f64().unwrap();
    assert!(g > 2.7 && g < 2.76);
    assert_eq!(balsys(&["constants", "--q", "6"]).status.code(), Some(2));
}

#[test]
fn apdiff_and_airgeneric() {
    let dir = tempfile::tempdir().unwrap();
    let f3 = file(dir.path(), "f3.txt", &full_space(3, 3));
    let (code, v) = json(&["apdiff", "-S", s(&f3), "-k", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["ap"].as_array().unwrap().len(), 3);
    assert_eq!(balsys(&["apdiff", "-S", s(&f3), "-k", "4"]).status.code(), Some(2));
    let ap = file(dir.path(), "ap.txt", "5 1 3\n1 3 1\n");
    let f5 = file(dir.path(), "f5.txt", &full_space(5, 2));
    let (code, v) = json(&["airgeneric", "-A", s(&ap), "-b", "1,-1", "-S", s(&f5), "--override-threshold"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["outcome"], "found");
}

#[test]
fn extremal_values() {
    let (code, v) = json(&["extremal", "--catalog", "3AP", "--q", "3", "--n", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["size"], 4);
    assert_eq!(v["result"]["exact"], true);
    let (code, v) = json(&["extremal", "--tricoloured", "--q", "2", "--n", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["size"], 1);
}

#[test]
fn catalog_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.txt");
    assert!(balsys(&["catalog", "emit", "--name", "T", "--q", "5", "-o", s(&out)]).status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "5 2 5\n1 3 1 0 0\n0 0 3 1 1\n");
    let (code, v) = json(&["catalog", "list"]);
    assert_eq!(code, 0);
    assert_eq!(v["systems"].as_array().unwrap().len(), 9);
}

#[test]
fn usage_and_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(balsys(&["nope"]).status.code(), Some(2));
    let bad = file(dir.path(), "bad.txt", "5 1 2\n1 7\n");
    assert_eq!(balsys(&["classify", "-A", s(&bad)]).status.code(), Some(2));
    assert_eq!(balsys(&["classify", "-A", "/nonexistent"]).status.code(), Some(2));
    let a = file(dir.path(), "star.txt", STAR);
    let f3 = file(dir.path(), "f3.txt", "3 1\n0\n1\n");
    assert_eq!(balsys(&["find", "shape", "-A", s(&a), "-S", s(&f3)]).status.code(), Some(2));
}

#[test]
fn text_output_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let out = balsys(&["classify", "-A", s(&file(dir.path(), "star.txt", STAR))]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "type_rc: true"));
    assert!(text.lines().any(|l| l == "thm_a: (i)"));
}
