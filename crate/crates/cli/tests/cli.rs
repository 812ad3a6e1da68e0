use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn k4frac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_k4frac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path_str(&path)]);
    let out = k4frac(&full);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path
}

fn edge_count(path: &Path) -> usize {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#') && !l.starts_with('n'))
        .count()
}

fn read_report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing_ms");
    v
}

#[test]
fn complete_graph_verifies_with_uniform_weight() {
    let dir = TempDir::new().unwrap();
    let g = generate(&dir, "k10.txt", &["complete", "--n", "10"]);
    assert_eq!(edge_count(&g), 45);
    let report = dir.path().join("r.json");
    let weights = dir.path().join("w.txt");
    let out = k4frac(&[
        "verify-graph",
        path_str(&g),
        "--exact",
        "--report",
        path_str(&report),
        "--weights",
        path_str(&weights),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("min weight: 1/28"));
    assert!(stdout(&out).contains("max |edge sum - 1|: 0"));
    let v = read_report(&report);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["mode"], "graph-verify");
    assert_eq!(v["summary"]["verdict"], "pass");
    assert_eq!(v["summary"]["exit_code"], 0);
    assert_eq!(v["checks"][0]["exact_values"]["min_weight"], "1/28");
    let text = fs::read_to_string(&weights).unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with(" 1/28")).count(), 210);
}

#[test]
fn generators_meet_their_contracts() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "m12.txt", &["complete-minus-matching", "--n", "12"]);
    assert_eq!(edge_count(&m), 60);
    let a = generate(&dir, "a.txt", &["random-min-degree", "--n", "33", "--delta", "31", "--seed", "7"]);
    let b = generate(&dir, "b.txt", &["random-min-degree", "--n", "33", "--delta", "31", "--seed", "7"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let g = k4frac::parse_edge_list(&fs::read_to_string(&a).unwrap()).unwrap();
    assert!(g.min_degree() >= 31);
    let bad = k4frac(&["gen", "random-min-degree", "--n", "5", "--delta", "5"]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn sparse_graph_reports_degree_bound() {
    let dir = TempDir::new().unwrap();
    let c5 = dir.path().join("c5.txt");
    fs::write(&c5, "n 5\n0 1\n1 2\n2 3\n3 4\n4 0\n").unwrap();
    let out = k4frac(&["verify-graph", path_str(&c5)]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("minimum degree 2"));
    assert!(stderr(&out).contains("4n/5"));
}

#[test]
fn negative_weight_is_reported_in_both_modes() {
    let dir = TempDir::new().unwrap();
    let g = generate(
        &dir,
        "neg.txt",
        &["random-min-degree", "--n", "16", "--delta", "13", "--seed", "5", "--p", "0.5"],
    );
    let exact = k4frac(&["verify-graph", path_str(&g)]);
    assert_eq!(code(&exact), 4);
    assert!(stdout(&exact).contains("negative weight -401/124740 on K4 [6, 8, 9, 13]"));
    let fast = k4frac(&["verify-graph", path_str(&g), "--fast"]);
    assert_eq!(code(&fast), 4);
}

#[test]
fn fast_and_exact_verdicts_agree() {
    let dir = TempDir::new().unwrap();
    let graphs = [
        generate(&dir, "k8.txt", &["complete", "--n", "8"]),
        generate(&dir, "m12.txt", &["complete-minus-matching", "--n", "12"]),
        generate(&dir, "r12.txt", &["random-min-degree", "--n", "12", "--delta", "10", "--seed", "2"]),
        generate(&dir, "r11.txt", &["random-min-degree", "--n", "11", "--delta", "7", "--seed", "1"]),
    ];
    for g in &graphs {
        let exact = code(&k4frac(&["verify-graph", path_str(g), "--exact"]));
        let fast = code(&k4frac(&["verify-graph", path_str(g), "--fast"]));
        assert_eq!(exact, fast, "{}", g.display());
    }
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "n 4\n0 1\n1 x\n").unwrap();
    assert_eq!(code(&k4frac(&["verify-graph", path_str(&bad)])), 2);
    assert_eq!(code(&k4frac(&["verify-graph", "/nonexistent/graph.txt"])), 2);
    assert_eq!(code(&k4frac(&["certify", "--hi", "0.06"])), 2);
    assert_eq!(code(&k4frac(&["optimize", "--program", "P99"])), 2);
    assert_eq!(code(&k4frac(&["optimize", "--program", "P3"])), 2);
    assert_eq!(code(&k4frac(&["verify-graph", "x", "--exact", "--fast"])), 2);
}

#[test]
fn certify_reports_endpoint_value_and_failing_step() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("c.json");
    let out = k4frac(&["certify", "--lo", "0", "--hi", "2/33", "--report", path_str(&report)]);
    assert_eq!(code(&out), 0);
    let v = read_report(&report);
    let order0 = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "order 0 sign")
        .unwrap();
    assert_eq!(order0["exact_values"]["value"], "-1345519/430489323");

    let out = k4frac(&["certify", "--lo", "0", "--hi", "1/10", "--report", path_str(&report)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("order-0 step"));
    let v = read_report(&report);
    assert_eq!(v["summary"]["verdict"], "fail");
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["outcome"] == "fail"));

    assert_eq!(code(&k4frac(&["certify", "--lo", "0", "--hi", "0"])), 0);
    assert_eq!(code(&k4frac(&["certify", "--lo", "1/10", "--hi", "0"])), 2);
}

#[test]
fn chain_check_reports_are_reproducible_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |p: &Path| {
        vec!["chain-check", "--d", "2/33", "--samples", "150", "--seed", "9", "--report"]
            .into_iter()
            .map(String::from)
            .chain([path_str(p).to_string()])
            .collect::<Vec<_>>()
    };
    let run = |extra: &[&str], p: &Path| {
        let mut full: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
        full.extend(args(p));
        let refs: Vec<&str> = full.iter().map(String::as_str).collect();
        k4frac(&refs)
    };
    assert_eq!(code(&run(&["--threads", "1"], &a)), 0);
    assert_eq!(code(&run(&["--threads", "3"], &b)), 0);
    let (va, vb) = (read_report(&a), read_report(&b));
    assert_eq!(va["mode"], "chain-check");
    assert_eq!(va["seed"], 9);
    assert_eq!(va["inputs"]["d"], "2/33");
    assert_eq!(va["checks"].as_array().unwrap().len(), 16);
    assert_eq!(without_timing(va), without_timing(vb));
}

#[test]
fn chain_check_runs_at_zero_and_beyond_the_threshold() {
    assert_eq!(code(&k4frac(&["chain-check", "--d", "0", "--samples", "40"])), 0);
    let out = k4frac(&["chain-check", "--d", "1/10", "--samples", "40"]);
    assert!(matches!(code(&out), 0 | 1));
    assert!(stdout(&out).contains("verdict:"));
}

#[test]
fn optimize_stays_below_the_closed_form() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("o.json");
    let out = k4frac(&["optimize", "--program", "P12", "--d", "2/33", "--report", path_str(&report)]);
    assert_eq!(code(&out), 0);
    let v = read_report(&report);
    let margin = k4frac::parse_rational(v["checks"][0]["exact_values"]["margin"].as_str().unwrap()).unwrap();
    assert!(margin >= k4frac::rational::int(0));

    let zero = k4frac(&["optimize", "--program", "P12", "--d", "0"]);
    assert_eq!(code(&zero), 0);
    assert!(stdout(&zero).contains("best (exact): 0\n"));

    let p10 = k4frac(&["optimize", "--program", "P10", "--d", "2/33", "--grid", "60"]);
    assert_eq!(code(&p10), 0);
    let line = stdout(&p10).lines().find(|l| l.starts_with("argmax:")).unwrap().to_string();
    let x = line.split_whitespace().find_map(|t| t.strip_prefix("x=")).unwrap();
    let x = k4frac::rational::to_f64(&k4frac::parse_rational(x).unwrap());
    assert!((x - (1.0 - 2.0 / 33.0)).abs() < 1e-3, "{line}");
}
