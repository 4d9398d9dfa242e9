use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/golden");

fn cake(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cake"))
        .args(args)
        .env_remove("CAKE_BUDGET")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn golden(name: &str) -> PathBuf {
    Path::new(GOLDEN).join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, contents).unwrap();
    p
}

const UNIFORM_PAIR: &str = r#"{"normalized": true, "agents": [
  {"name": "a", "pieces": [{"start": "0", "end": "1", "density": "1"}]},
  {"name": "b", "pieces": [{"start": "0", "end": "1", "density": "1"}]}]}"#;

#[test]
fn solve_ef3_reproduces_golden_files() {
    let dir = TempDir::new().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let out = dir.path().join("alloc.json");
    let inst = golden("disjoint_pair.json");
    let o = cake(&[
        "solve", "--algo", "ef3", "--epsilon", "1/3", "--instance", s(&inst), "--trace", s(&trace), "--out", s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["report"]["envy_ratio"]["exact"], "1");
    assert_eq!(fs::read_to_string(trace).unwrap(), fs::read_to_string(golden("disjoint_pair_ef3_trace.jsonl")).unwrap());
    assert_eq!(
        fs::read_to_string(&out).unwrap(),
        fs::read_to_string(golden("disjoint_pair_ef3_allocation.json")).unwrap()
    );

    let v = cake(&["verify", "--instance", s(&inst), "--allocation", s(&out), "--theorem", "ef3", "--theorem", "efnsw"]);
    assert_eq!(code(&v), 0, "{}", stdout(&v));
    assert_eq!(stdout(&v).lines().filter(|l| l.contains(": pass")).count(), 2);
}

#[test]
fn solve_ef2_reports_gap_count() {
    let o = cake(&["solve", "--algo", "ef2", "--instance", s(&golden("disjoint_pair.json"))]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let gaps = doc["summary"]["gaps_at_merge"].as_u64().unwrap();
    assert!(gaps <= doc["summary"]["n"].as_u64().unwrap());
}

#[test]
fn solve_other_algorithms() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "u.json", UNIFORM_PAIR);
    let o = cake(&["solve", "--algo", "nsw-exhaustive", "--alpha", "2", "--instance", s(&inst)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["report"]["nsw"]["exact"], "(1/4)^(1/2)");

    let o = cake(&["solve", "--algo", "rho-mean", "--rho", "1", "--epsilon", "1/2", "--instance", s(&inst)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn usage_and_validation_errors() {
    let o = cake(&["solve", "--algo", "ef3", "--instance", "/nonexistent/instance.json"]);
    assert_eq!(code(&o), 2);
    let o = cake(&["solve", "--algo", "ef3", "--epsilon", "0.3", "--instance", s(&golden("disjoint_pair.json"))]);
    assert_eq!(code(&o), 2);
    let o = cake(&["solve", "--algo", "warp"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn budget_exhaustion_exits_three() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "u.json", UNIFORM_PAIR);
    let o = Command::new(env!("CARGO_BIN_EXE_cake"))
        .args(["solve", "--algo", "nsw-exhaustive", "--instance", s(&inst)])
        .env("CAKE_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("budget exceeded"));

    let o = Command::new(env!("CARGO_BIN_EXE_cake"))
        .args(["solve", "--algo", "rho-mean", "--epsilon", "1/100", "--instance", s(&inst)])
        .env("CAKE_BUDGET", "100000")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("smallest epsilon within the budget: 1/"), "{}", stderr(&o));
}

#[test]
fn gen_random_is_reproducible() {
    let a = cake(&["gen", "random", "--agents", "3", "--seed", "7"]);
    let b = cake(&["gen", "random", "--agents", "3", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = cake(&["gen", "random", "--agents", "3", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn gen_hardness_gadgets() {
    let dir = TempDir::new().unwrap();
    let cnf = write(&dir, "f.cnf", "p cnf 2 2\n1 2 0\n-1 -2 0\n");
    let out = dir.path().join("g.json");
    let o = cake(&["gen", "hardness-nsw", "--cnf", s(&cnf), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let inst: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(inst["agents"].as_array().unwrap().len(), 9);
    assert!(dir.path().join("g.json.layout.json").exists());

    let o = cake(&["gen", "hardness-rho", "--rho", "1/2", "--cnf", s(&cnf)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let inst: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(inst["agents"].as_array().unwrap().len(), 8);

    let bad = write(&dir, "bad.cnf", "p cnf 1 1\n1 0\n");
    let o = cake(&["gen", "hardness-nsw", "--cnf", s(&bad)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("never occurs negatively"), "{}", stderr(&o));
    let o = cake(&["gen", "hardness-nsw", "--pad", "--cnf", s(&bad)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn verify_rejects_coverage_gap() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "u.json", UNIFORM_PAIR);
    let gap = write(
        &dir,
        "gap.json",
        r#"{"pieces": [{"agent": "a", "left": "0", "right": "1/4"}, {"agent": "b", "left": "1/2", "right": "1"}]}"#,
    );
    let o = cake(&["verify", "--instance", s(&inst), "--allocation", s(&gap)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_checks_pass_and_fail() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "u.json", UNIFORM_PAIR);
    let half = write(
        &dir,
        "half.json",
        r#"{"pieces": [{"agent": "a", "left": "0", "right": "1/2"}, {"agent": "b", "left": "1/2", "right": "1"}]}"#,
    );
    let o = cake(&["verify", "--instance", s(&inst), "--allocation", s(&half)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = cake(&["verify", "--instance", s(&inst), "--allocation", s(&half), "--theorem", "4ef", "--theorem", "nsw3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("(approximate)"));

    let skew = write(
        &dir,
        "skew.json",
        r#"{"pieces": [{"agent": "a", "left": "0", "right": "1/8"}, {"agent": "b", "left": "1/8", "right": "1"}]}"#,
    );
    let o = cake(&["verify", "--instance", s(&inst), "--allocation", s(&skew), "--theorem", "ef3"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL"));

    // the document printed by solve is accepted as well
    let solved = cake(&["solve", "--algo", "ef3", "--instance", s(&inst)]);
    let doc = write(&dir, "doc.json", &stdout(&solved));
    let o = cake(&["verify", "--instance", s(&inst), "--allocation", s(&doc), "--theorem", "ef3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}
