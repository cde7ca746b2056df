use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_regseed");

fn regseed(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn gen_regularize_measure_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let gstar = dir.path().join("gstar.json");
    let sidecar = dir.path().join("sig.json");

    let out = regseed(&["gen", "--graph", "planted:2,0.1:6,6,6", "--seed", "4", "--out", path(&g)]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&g).unwrap();
    assert_eq!(regseed(&["gen", "--graph", "planted:2,0.1:6,6,6", "--seed", "4"]).stdout, text.as_bytes());

    let out = regseed(&["regularize", "--input", path(&g), "--m", "2", "--seed", "1", "--out", path(&gstar), "--sidecar", path(&sidecar)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let before: Value = serde_json::from_str(&text).unwrap();
    let after: Value = serde_json::from_str(&std::fs::read_to_string(&gstar).unwrap()).unwrap();
    assert_eq!(before["pairs"], after["pairs"]);
    let sig: Value = serde_json::from_str(&std::fs::read_to_string(&sidecar).unwrap()).unwrap();
    for p in 0..3 {
        let palette = after["vertex_colors"][p].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).max().unwrap();
        assert_eq!(sig["parts"][p].as_array().unwrap().len() as u64, palette + 1);
    }

    let out = regseed(&["measure", "--input", path(&gstar), "--h", "1", "--mode", "exhaustive", "--probes", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&out);
    assert!(rep["score"].as_f64().unwrap() >= 0.0);
    assert_eq!(rep["pairs"].as_array().unwrap().len(), 3);
    assert_eq!(rep["plan"]["mode"], "exhaustive");
    assert!(rep["coverage"]["statement"].as_str().unwrap().contains("not verified"));
}

#[test]
fn measure_with_theoretical_budget_reports_big_m() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("mono.json");
    assert!(regseed(&["gen", "--graph", "mono:3,3", "--out", path(&g)]).status.success());
    let out = regseed(&[
        "measure", "--input", path(&g), "--h", "1", "--eps", "0.6", "--theoretical-m", "0", "--b1", "1", "--b2", "2",
        "--mode", "mc", "--samples", "100", "--eta-samples", "5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&out);
    assert_eq!(rep["big_m"], 400);
    assert_eq!(rep["score"], 0.0);
}

#[test]
fn experiment_is_reproducible_and_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("h.json");
    assert!(regseed(&["gen", "--graph", "half:8", "--out", path(&g)]).status.success());
    let args = |graph: &str| {
        vec![
            "experiment".to_string(), "--graph".into(), graph.into(), "--schedule".into(), "0,1,2".into(),
            "--h".into(), "1".into(), "--trials".into(), "3".into(), "--samples".into(), "500".into(),
            "--eta-samples".into(), "10".into(), "--seed".into(), "5".into(),
        ]
    };
    let run = |graph: &str| {
        let a = args(graph);
        let out = regseed(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        json(&out)
    };
    let from_spec = run("half:8");
    let from_file = run(path(&g));
    assert_eq!(from_spec["trials"], from_file["trials"]);
    assert_eq!(from_spec, run("half:8"));
    assert_eq!(from_spec["trials"].as_array().unwrap().len(), 9);

    let out = regseed(&["experiment", "--graph", "half:8", "--schedule", "0,2", "--trials", "4", "--faithful", "--samples", "200", "--eta-samples", "5"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["trials"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_single_lemma_reports_json() {
    let out = regseed(&["verify", "--lemma", "cauchy", "--instances", "10", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["violations"], 0);
    assert_eq!(doc["suites"][0]["instances"], 10);
}

#[test]
fn exit_codes() {
    // validation: bad generator, bad schedule, unknown lemma, bad flag
    assert_eq!(regseed(&["gen", "--graph", "nonsense"]).status.code(), Some(1));
    assert_eq!(regseed(&["experiment", "--graph", "half:4", "--schedule", "1,2"]).status.code(), Some(1));
    assert_eq!(regseed(&["verify", "--lemma", "fermat"]).status.code(), Some(1));
    assert_eq!(regseed(&["gen", "--bogus"]).status.code(), Some(1));
    assert_eq!(regseed(&["measure", "--input", "/nonexistent/g.json"]).status.code(), Some(1));
    assert_eq!(regseed(&["--help"]).status.code(), Some(0));

    // work cap: exhaustive enumeration far beyond the cap
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("h.json");
    assert!(regseed(&["gen", "--graph", "half:8", "--out", path(&g)]).status.success());
    let out = regseed(&["measure", "--input", path(&g), "--h", "2", "--mode", "exhaustive", "--work-cap", "10"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("work cap"));
}

#[test]
fn schedule_reports_overflow_in_json() {
    let out = regseed(&["schedule", "--r", "2", "--h", "2", "--b1", "1", "--b2", "2", "--eps", "0.6", "--digit-cap", "50"]);
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["c"], "3.62038671967e5");
    assert_eq!(doc["recursion"], "equality (minimal schedule)");
    assert_eq!(doc["overflow"]["value"], "m(2)");
    let doc = json(&regseed(&["schedule", "--r", "3", "--h", "1", "--b1", "2", "--b2", "2", "--eps", "0.5", "--digit-cap", "50"]));
    assert_eq!(doc["m"][1], "2985984");
}
