//! End-to-end runs of the `corder` binary on a small corpus.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corder")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = corder(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Workspace { dir: tempfile::tempdir().unwrap() };
        ok(&["gen-corpus", "--families", "10", "--variants-per-family", "4", "--out", s(&ws.path("corpus.jsonl"))]);
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// A tiny encoder so a run takes well under a second.
    fn config(&self) -> PathBuf {
        let path = self.path("run.toml");
        let text = format!(
            "seed = 5\nsteps = 9\nbatch_size = 4\ndim = 8\nconv_steps = 2\nvocab = 64\ncorpus = {:?}\n",
            s(&self.path("corpus.jsonl"))
        );
        fs::write(&path, text).unwrap();
        path
    }

    fn pretrain(&self, ckpt: &str, extra: &[&str]) -> Value {
        let config = self.config();
        let out_path = self.path(ckpt);
        let mut args = vec!["pretrain", "--config", s(&config), "--out", s(&out_path)];
        args.extend_from_slice(extra);
        stdout_json(&ok(&args))
    }
}

#[test]
fn gen_corpus_writes_jsonl_to_stdout() {
    let out = ok(&["gen-corpus", "--families", "3", "--variants-per-family", "2"]);
    let lines: Vec<Value> = String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0]["label"], "gcd");
    assert!(!out.stderr.is_empty());
}

#[test]
fn gen_corpus_rejects_too_many_families() {
    assert_eq!(corder(&["gen-corpus", "--families", "11"]).status.code(), Some(2));
}

#[test]
fn transform_then_verify() {
    let ws = Workspace::new();
    let views = ws.path("views.jsonl");
    let report = stdout_json(&ok(&["transform", "--in", s(&ws.path("corpus.jsonl")), "--out", s(&views)]));
    assert_eq!(report["snippets"], 40);
    assert_eq!(report["census"].as_array().unwrap().len(), 5);
    let written = fs::read_to_string(&views).unwrap().lines().count();
    assert_eq!(report["views"], written);

    let out = ok(&["verify", "--in", s(&ws.path("corpus.jsonl")), "--views", s(&views), "--trials", "5"]);
    let report = stdout_json(&out);
    assert_eq!(report["total"]["views"], written);
    assert_eq!(report["total"]["inequivalent"], 0);
}

#[test]
fn verify_exits_1_on_a_broken_view() {
    let ws = Workspace::new();
    let corpus = fs::read_to_string(ws.path("corpus.jsonl")).unwrap();
    let first: Value = serde_json::from_str(corpus.lines().next().unwrap()).unwrap();
    let code = first["code"].as_str().unwrap().replacen("return ", "return 1 + ", 1);
    let view = serde_json::json!({ "origin_id": first["id"], "op": "VR", "seed": 0, "code": code });
    let views = ws.path("bad.jsonl");
    fs::write(&views, format!("{view}\n")).unwrap();
    let out = corder(&["verify", "--in", s(&ws.path("corpus.jsonl")), "--views", s(&views)]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["total"]["inequivalent"], 1);
    assert_eq!(report["inequivalent"][0]["origin_id"], first["id"]);
}

#[test]
fn flags_override_the_config_file() {
    let ws = Workspace::new();
    let from_file = ws.pretrain("a.ckpt", &[]);
    assert_eq!(from_file["steps"], 9);
    assert_eq!(from_file["seed"], 5);
    let flagged = ws.pretrain("b.ckpt", &["--steps", "2", "--ops", "PS"]);
    assert_eq!(flagged["steps"], 2);
    assert_eq!(flagged["seed"], 5);
    assert_eq!(flagged["ops"], serde_json::json!(["PS"]));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let ws = Workspace::new();
    let config = ws.path("bad.toml");
    fs::write(&config, "stpes = 3\n").unwrap();
    let out = corder(&["pretrain", "--config", s(&config)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stpes"));
}

#[test]
fn pipeline_is_deterministic() {
    let ws = Workspace::new();
    let corpus = ws.path("corpus.jsonl");
    let mut runs = Vec::new();
    for tag in ["x", "y"] {
        let ckpt = ws.path(&format!("{tag}.ckpt"));
        let loss = ws.path(&format!("{tag}.csv"));
        let mut summary = ws.pretrain(&format!("{tag}.ckpt"), &["--loss-csv", s(&loss)]);
        summary["checkpoint"] = Value::Null;
        let emb = ok(&["embed", "--checkpoint", s(&ckpt), "--in", s(&corpus), "--views"]).stdout;
        let emb_path = ws.path(&format!("{tag}.jsonl"));
        fs::write(&emb_path, &emb).unwrap();
        let mrr = ok(&["eval-retrieval", "--embeddings", s(&emb_path), "--protocol", "mrr"]).stdout;
        runs.push((fs::read(&ckpt).unwrap(), fs::read(&loss).unwrap(), summary, emb, mrr));
    }
    assert_eq!(runs[0], runs[1]);
    let csv = String::from_utf8(runs[0].1.clone()).unwrap();
    assert_eq!(csv.lines().next(), Some("step,loss"));
    assert_eq!(csv.lines().count(), 10);
}

#[test]
fn embed_search_and_evaluate() {
    let ws = Workspace::new();
    let corpus = ws.path("corpus.jsonl");
    ws.pretrain("m.ckpt", &[]);
    let ckpt = ws.path("m.ckpt");
    let originals = ws.path("orig.jsonl");
    ok(&["embed", "--checkpoint", s(&ckpt), "--in", s(&corpus), "--out", s(&originals)]);
    let records: Vec<Value> = fs::read_to_string(&originals).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 40);
    assert_eq!(records[0]["vector"].as_array().unwrap().len(), 8);

    let map = stdout_json(&ok(&["eval-retrieval", "--embeddings", s(&originals), "--protocol", "map", "--k", "3"]));
    assert_eq!(map["cutoff"], 3);
    assert_eq!(map["queries"].as_array().unwrap().len(), 40);
    let metric = map["metric"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&metric));

    let hits = stdout_json(&ok(&["search", "--index", s(&originals), "--query-file", s(&originals), "--k", "2"]));
    assert_eq!(hits.as_array().unwrap().len(), 40);
    assert_eq!(hits[0]["hits"][0]["id"], hits[0]["query"]);
    let by_code = stdout_json(&ok(&["search", "--index", s(&originals), "--query-file", s(&corpus), "--checkpoint", s(&ckpt)]));
    assert_eq!(by_code, stdout_json(&ok(&["search", "--index", s(&originals), "--query-file", s(&originals)])));

    let probe = stdout_json(&ok(&["eval-probe", "--train", s(&originals), "--test", s(&originals), "--epochs", "50"]));
    assert_eq!(probe["test_size"], 40);
    assert_eq!(probe["per_class_precision"].as_object().unwrap().len(), 10);
}

#[test]
fn ablate_emits_one_row_per_operator() {
    let ws = Workspace::new();
    let config = ws.config();
    let out = ok(&["ablate", "--config", s(&config), "--steps", "2"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "op,applicable,total,steps,final_loss,mrr,map,status");
    let ops: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ops, ["VR", "US", "PS", "LX", "SF"]);
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 8);
        assert!(line.ends_with(",ok") || line.ends_with(",insufficient_corpus"), "{line}");
    }
}
