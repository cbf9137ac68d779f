use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_contextrec");
const ONTOLOGY: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/default_ontology.toml");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_good_and_bad_ontologies() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["validate", "--ontology", ONTOLOGY, "--strict"]);

    let gap = "version = \"t\"\n[[time_rules]]\nstart = 0\nend = 12\nlabel = \"morning\"\n[[aspects.TIME]]\nid = \"morning\"\nname = \"Morning\"\n";
    fs::write(dir.path().join("gap.toml"), gap).unwrap();
    let out = run(dir.path(), &["validate", "--ontology", "gap.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[ontology]:"), "{}", stderr(&out));
    assert!(stderr(&out).contains("do not partition [0,24)"));

    let out = run(dir.path(), &["validate", "--ontology", "missing.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[io]:"), "{}", stderr(&out));
}

#[test]
fn usage_and_parameter_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["generate", "--out", "x.csv", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(dir.path(), &["generate", "--rho", "1.2", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("rho out of [0,1]"), "{}", stderr(&out));
    assert!(stderr(&out).starts_with("error[param]:"));
    assert!(!dir.path().join("x.csv").exists());
}

fn pipeline(dir: &Path, workers: &str) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    ok(dir, &["--workers", workers, "generate", "--users", "4", "--records-per-user", "50", "--seed", "11", "--out", "records.csv"]);
    ok(
        dir,
        &[
            "--workers", workers, "experiment", "--records", "records.csv", "--suite", "--trees", "12", "--depth-grid",
            "4,unlimited", "--seed", "11", "--out", "report.json",
        ],
    );
    ok(dir, &["--workers", workers, "report", "--input", "report.json", "--format", "table", "--out", "table.txt"]);
    let read = |name: &str| fs::read(dir.join(name)).unwrap();
    (read("records.csv"), read("report.json"), read("table.txt"))
}

#[test]
fn pipeline_is_reproducible_across_runs_and_workers() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let first = pipeline(a.path(), "1");
    let second = pipeline(b.path(), "1");
    let parallel = pipeline(c.path(), "3");
    assert_eq!(first, second);
    assert_eq!(first, parallel);
    for name in ["records.csv", "report.json", "table.txt"] {
        assert!(a.path().join(format!("{name}.manifest.json")).exists(), "{name} manifest");
    }
    let table = String::from_utf8(first.2).unwrap();
    assert!(table.contains("Sensors + Other Aspects"));
}

#[test]
fn manifest_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["generate", "--users", "2", "--records-per-user", "10", "--rho", "0.3", "--out", "r.csv"]);
    let text = fs::read_to_string(dir.path().join("r.csv.manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["command"], "generate");
    assert_eq!(m["config"]["rho"], 0.3);
    assert_eq!(m["config"]["users"], 2);
    assert_eq!(m["synth"]["params"]["seed"], 7);
    assert_eq!(m["synth"]["vocabularies"]["WE"].as_array().unwrap().len(), 8);
    assert_eq!(m["output"]["sha256"], m["synth"]["digest"]);
}

#[test]
fn single_arm_train_and_report_formats() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--users", "3", "--records-per-user", "30", "--out", "r.csv"]);
    ok(
        d,
        &["experiment", "--records", "r.csv", "--target", "WO", "--with-aspects", "WE,WA", "--trees", "5", "--depth-grid", "6", "--out", "one.json"],
    );
    let report: serde_json::Value = serde_json::from_slice(&fs::read(d.join("one.json")).unwrap()).unwrap();
    assert_eq!(report["spec"]["inputs"], serde_json::json!(["WE", "WA"]));
    assert_eq!(report["folds"].as_array().unwrap().len(), 5);

    let out = ok(d, &["report", "--input", "one.json", "--format", "plotdata"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("arm,target,inputs,label"));
    assert_eq!(text.lines().count(), 1 + 5);
    ok(d, &["report", "--input", "one.json", "--format", "json"]);
    ok(d, &["report", "--input", "one.json", "--format", "csv"]);

    ok(d, &["train", "--records", "r.csv", "--target", "WA", "--trees", "4", "--depth-grid", "5", "--out", "model.json"]);
    let model: serde_json::Value = serde_json::from_slice(&fs::read(d.join("model.json")).unwrap()).unwrap();
    assert_eq!(model["format"], "contextrec-forest/1");
    assert_eq!(model["trees"].as_array().unwrap().len(), 4);

    let out = run(d, &["experiment", "--records", "r.csv", "--target", "WA", "--with-aspects", "WA", "--out", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("also an input"));
}

#[test]
fn ingest_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let t0: i64 = 1_581_938_718_026;
    let mut log = String::new();
    for k in 0..90 {
        log.push_str(&format!(
            "{{\"user\":\"u1\",\"sensor\":\"acceleration\",\"ts_ms\":{},\"values\":[0.0,0.0,{}]}}\n",
            t0 + k * 40_000,
            9.8 + k as f64 * 0.001
        ));
    }
    log.push_str("{\"user\":\"u1\",\"sensor\":\"nonexistent\",\"ts_ms\":0,\"values\":[1]}\n");
    fs::write(d.join("log.jsonl"), log).unwrap();
    fs::write(
        d.join("ann.csv"),
        format!("user,ts_ms,we,wa,wo\nu1,{t0},classroom,lesson,classmate\nu1,{},library,study,alone\n", t0 + 1_800_000),
    )
    .unwrap();
    ok(d, &["ingest", "--log", "log.jsonl", "--annotations", "ann.csv", "--out", "rec.csv"]);
    let csv = fs::read_to_string(d.join("rec.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let out = run(d, &["ingest", "--log", "log.jsonl", "--annotations", "ann.csv", "--strict", "--out", "rec2.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 91"), "{}", stderr(&out));
    ok(d, &["validate", "--ontology", ONTOLOGY, "--annotations", "ann.csv", "--records", "rec.csv"]);

    fs::write(d.join("bad.csv"), format!("user,ts_ms,we,wa,wo\nu1,{t0},moon,lesson,classmate\n")).unwrap();
    let out = run(d, &["validate", "--ontology", ONTOLOGY, "--annotations", "bad.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn graph_export_and_query() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["graph", "--out", "scene.jsonl"]);
    let out = ok(d, &["graph", "--input", "scene.jsonl", "--aspect", "WA", "--ontology", ONTOLOGY, "--out", "again.jsonl"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("lesson"));
    assert_eq!(fs::read(d.join("scene.jsonl")).unwrap(), fs::read(d.join("again.jsonl")).unwrap());
    fs::write(d.join("broken.jsonl"), "[\"R\",\"a\",\"Attend\",\"b\"]\n").unwrap();
    let out = run(d, &["graph", "--input", "broken.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 1: unknown entity a"), "{}", stderr(&out));
}
