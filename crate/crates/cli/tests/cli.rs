use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BORDERLINE: &str = r#"{"partition":["0","1/2","1"],"values":[["0","1/2"],["1/2","1/2"]]}"#;
const FOUR_BLOCK: &str = r#"{"partition":["0","0.2","0.5","0.75","1"],
  "values":[["0","1/2","0","0"],["1/2","0","1/2","0"],["0","1/2","0","1/2"],["0","0","1/2","1/2"]]}"#;
const BIPARTITE: &str = r#"{"partition":["0","1/2","1"],"values":[["0","1/2"],["1/2","0"]]}"#;
const COMPLETE: &str = r#"{"partition":["0","1"],"values":[["1"]]}"#;

fn hprop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hprop")).args(args).output().unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas").join(name);
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(validator: &jsonschema::Validator, v: &Value) {
    let errors: Vec<String> = validator.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{v:#}");
}

#[test]
fn analyze_borderline_and_four_block() {
    let dir = TempDir::new().unwrap();
    let v = schema("analyze.schema.json");

    let report = stdout_json(&hprop(&["analyze", "--graphon", s(&write(&dir, "b.json", BORDERLINE))]));
    assert_valid(&v, &report);
    assert_eq!(report["verdict"], "BORDERLINE");
    assert_eq!(report["membership"]["certificate"], serde_json::json!(["1", "0"]));

    let report = stdout_json(&hprop(&["analyze", "--graphon", s(&write(&dir, "f.json", FOUR_BLOCK))]));
    assert_valid(&v, &report);
    assert_eq!(report["verdict"], "H_PROPERTY");
    assert_eq!(report["membership"]["certificate"], serde_json::json!(["2/5", "1/5", "3/10", "1/10"]));

    let report = stdout_json(&hprop(&["analyze", "--graphon", s(&write(&dir, "k.json", BIPARTITE))]));
    assert_valid(&v, &report);
    assert_eq!(report["verdict"], "NO_H_PROPERTY");
    assert_eq!(report["line_order"], Value::Null);
}

#[test]
fn analyze_outside_polytope_reports_witness() {
    let dir = TempDir::new().unwrap();
    let g = r#"{"partition":["0","3/5","4/5","9/10","1"],
      "values":[["0","1/2","0","0"],["1/2","0","1/2","0"],["0","1/2","0","1/2"],["0","0","1/2","1/2"]]}"#;
    let report = stdout_json(&hprop(&["analyze", "--graphon", s(&write(&dir, "o.json", g))]));
    assert_valid(&schema("analyze.schema.json"), &report);
    assert_eq!(report["verdict"], "NO_H_PROPERTY");
    assert_eq!(report["membership"]["status"], "outside");
    assert!(report["membership"]["infeasibility_witness"].as_str().unwrap().contains("residual"));
}

#[test]
fn analyze_rejects_malformed_partition() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"partition":["0","1/2","1/4","1"],"values":[["0","0","0"],["0","0","0"],["0","0","0"]]}"#);
    let out = hprop(&["analyze", "--graphon", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NonMonotonePartition"));

    let out = hprop(&["analyze", "--graphon", s(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_complete_graph_and_determinism() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k.json", COMPLETE);
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for out in [&a, &b] {
        assert!(hprop(&["sample", "--graphon", s(&g), "--n", "4", "--seed", "7", "--out", s(out)]).status.success());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, "4 1\n1 1 1 1\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let g = write(&dir, "b.json", BORDERLINE);
    let c = dir.path().join("c.txt");
    let d = dir.path().join("d.txt");
    hprop(&["sample", "--graphon", s(&g), "--n", "300", "--seed", "1", "--out", s(&c)]);
    hprop(&["sample", "--graphon", s(&g), "--n", "300", "--seed", "1", "--out", s(&d)]);
    assert_eq!(fs::read(&c).unwrap(), fs::read(&d).unwrap());
}

#[test]
fn sampled_borderline_dump_has_no_edge_inside_block_one() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "b.json", BORDERLINE);
    let out = dir.path().join("g.txt");
    assert!(hprop(&["sample", "--graphon", s(&g), "--n", "400", "--seed", "12", "--out", s(&out)]).status.success());
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("400 2"));
    let labels: Vec<&str> = lines.next().unwrap().split(' ').collect();
    let mut edges = 0;
    for line in lines {
        let (u, v) = line.split_once(' ').unwrap();
        let (u, v): (usize, usize) = (u.parse().unwrap(), v.parse().unwrap());
        assert!(labels[u] != "1" || labels[v] != "1", "edge {u} {v}");
        edges += 1;
    }
    assert!(edges > 1000);
}

#[test]
fn sample_rejects_bad_inputs() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "a.json", r#"{"partition":["0","1"],"values":[["3/2"]]}"#);
    let out = hprop(&["sample", "--graphon", s(&g), "--n", "4", "--seed", "1", "--out", s(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ValueOutOfRange"));
    let out = hprop(&["sample", "--graphon", s(&g), "--n", "-4", "--seed", "1", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decide_small_graphs() {
    let dir = TempDir::new().unwrap();
    let v = schema("decide.schema.json");

    let path = write(&dir, "path.txt", "3 1\n1 1 1\n0 1\n1 2\n");
    let res = stdout_json(&hprop(&["decide", "--graph", s(&path)]));
    assert_valid(&v, &res);
    assert_eq!(res["decision"], false);
    assert_eq!(res["method"], "matching");

    let tri = write(&dir, "tri.txt", "3 1\n1 1 1\n0 1\n1 2\n0 2\n");
    let res = stdout_json(&hprop(&["decide", "--graph", s(&tri)]));
    assert_valid(&v, &res);
    assert_eq!(res["decision"], true);
    let cycles = res["cycles"].as_array().unwrap();
    assert_eq!(cycles.len(), 1);
    assert_eq!(cycles[0].as_array().unwrap().len(), 3);
}

#[test]
fn decide_rejects_malformed_dumps() {
    let dir = TempDir::new().unwrap();
    for (i, body) in ["", "3 1\n1 1\n", "2 1\n1 1\n0 5\n", "2 1\n1 1\n0 x\n", "2 0\n\n"].iter().enumerate() {
        let p = write(&dir, &format!("bad{i}.txt"), body);
        assert_eq!(hprop(&["decide", "--graph", s(&p)]).status.code(), Some(2), "{body:?}");
    }
}

#[test]
fn decide_constructive_on_four_block_samples() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "f.json", FOUR_BLOCK);
    let v = schema("decide.schema.json");
    for seed in 0..10 {
        let dump = dir.path().join(format!("s{seed}.txt"));
        assert!(hprop(&["sample", "--graphon", s(&g), "--n", "800", "--seed", &seed.to_string(), "--out", s(&dump)])
            .status
            .success());
        let res = stdout_json(&hprop(&["decide", "--graph", s(&dump), "--constructive", "--graphon", s(&g)]));
        assert_valid(&v, &res);
        assert_eq!(res["method"], "constructive");
        assert_eq!(res["decision"], true, "seed {seed}: {}", res["outcome"]);
        let covered: usize = res["cycles"].as_array().unwrap().iter().map(|c| c.as_array().unwrap().len()).sum();
        assert_eq!(covered, 800);
    }
}

#[test]
fn decide_constructive_needs_a_line_graphon() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k.json", BIPARTITE);
    let dump = dir.path().join("g.txt");
    hprop(&["sample", "--graphon", s(&g), "--n", "10", "--seed", "1", "--out", s(&dump)]);
    let out = hprop(&["decide", "--graph", s(&dump), "--constructive", "--graphon", s(&g)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NotALineGraphon"));
}

fn read_estimates(dir: &Path) -> Vec<f64> {
    let csv = fs::read_to_string(dir.join("convergence.csv")).unwrap();
    csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect()
}

#[test]
fn reproduce_no_odd_cycle_is_all_zero() {
    let dir = TempDir::new().unwrap();
    let out = hprop(&["reproduce", "--preset", "no-odd-cycle", "--out", s(dir.path())]);
    assert!(out.status.success());
    let est = read_estimates(dir.path());
    assert!(!est.is_empty());
    assert!(est.iter().all(|&e| e == 0.0));
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["preset"], "no-odd-cycle");
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn reproduce_line_reaches_one() {
    let dir = TempDir::new().unwrap();
    assert!(hprop(&["reproduce", "--preset", "line", "--out", s(dir.path()), "--threads", "2"]).status.success());
    assert!(*read_estimates(dir.path()).last().unwrap() >= 0.98);
}

#[test]
fn reproduce_borderline_is_one_half() {
    let dir = TempDir::new().unwrap();
    assert!(hprop(&["mc", "--preset", "borderline", "--out", s(dir.path())]).status.success());
    let last = *read_estimates(dir.path()).last().unwrap();
    assert!((0.46..=0.54).contains(&last), "{last}");
}

#[test]
fn mc_custom_runs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "b.json", BORDERLINE);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = hprop(&["mc", "--graphon", s(&g), "--n", "20,40", "--trials", "25", "--seed", "4", "--method", "both", "--threads", threads, "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["trials.csv", "convergence.csv", "summary.json", "summary.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let header = fs::read_to_string(a.join("trials.csv")).unwrap();
    assert!(header.starts_with("n,trial,seed,n_1,n_2,decision,constructive_outcome\n"));

    let timed = dir.path().join("t");
    hprop(&["mc", "--graphon", s(&g), "--n", "20", "--trials", "5", "--timing", "--out", s(&timed)]);
    let header = fs::read_to_string(timed.join("trials.csv")).unwrap();
    assert!(header.lines().next().unwrap().ends_with(",elapsed_ms"));
}

#[test]
fn mc_rejects_bad_configs() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k.json", BIPARTITE);
    let out = hprop(&["mc", "--graphon", s(&g), "--n", "20,10", "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    let out = hprop(&["mc", "--graphon", s(&g), "--n", "11", "--method", "constructive", "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unwritable_output_directory() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "plain-file", "x");
    let target = file.join("sub");
    let out = hprop(&["reproduce", "--preset", "no-odd-cycle", "--out", s(&target)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn schemas_reject_malformed_reports() {
    let v = schema("decide.schema.json");
    assert!(!v.is_valid(&serde_json::json!({"decision": "yes", "method": "matching", "cycles": null})));
    assert!(!v.is_valid(&serde_json::json!({"decision": true, "method": "matching", "cycles": [[0]]})));
    let dir = TempDir::new().unwrap();
    let mut report = stdout_json(&hprop(&["analyze", "--graphon", s(&write(&dir, "b.json", BORDERLINE))]));
    report["verdict"] = "MAYBE".into();
    assert!(!schema("analyze.schema.json").is_valid(&report));
}
