//! Acceptance run: one PASS/FAIL line per criterion on stdout, exit status 1
//! if any criterion fails.
//!
//! `CORDER_ACCEPTANCE=1,4` restricts the run to the listed criteria.

use std::collections::BTreeSet;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Output};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use serde_json::Value;

use corder_core::contrastive::nt_xent;
use corder_core::encoder::{backward, forward, EncoderParams, Forest};
use corder_core::evalkit::{average_precision, map, mrr, precision_at_k, reciprocal_rank};
use corder_core::numerics::{Matrix, Pcg32};
use corder_core::syntax::{lex, parse_source, print, random_program, RandomProgramConfig, EOF_LEXEME};
use corder_core::transform::{sample_views, NamePool, OperatorTag};
use corder_core::EncoderConfig;

type Check = fn(&Context) -> Result<String, String>;

const CRITERIA: [(u32, &str, Check); 9] = [
    (1, "semantic preservation", semantic_preservation),
    (2, "gradient correctness", gradient_correctness),
    (3, "loss formula", loss_formula),
    (4, "pretraining effect on retrieval", retrieval_effect),
    (5, "linear probe", linear_probe),
    (6, "single-operator ablation", ablation),
    (7, "metric oracles", metric_oracles),
    (8, "determinism", determinism),
    (9, "syntax round trip and fuzzing", syntax_round_trip),
];

struct Context {
    dir: PathBuf,
    pretrained: OnceLock<Result<Pretrained, String>>,
}

fn main() -> ExitCode {
    let selected: Option<BTreeSet<u32>> =
        std::env::var("CORDER_ACCEPTANCE").ok().map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let dir = tempfile::tempdir().expect("temp dir");
    let ctx = Context { dir: dir.path().to_path_buf(), pretrained: OnceLock::new() };
    let mut failures = 0;
    for (number, name, check) in CRITERIA {
        if selected.as_ref().is_some_and(|s| !s.contains(&number)) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| check(&ctx))).unwrap_or_else(|e| Err(panic_message(e)));
        let secs = start.elapsed().as_secs_f64();
        let (status, detail) = match outcome {
            Ok(detail) => ("PASS", detail),
            Err(detail) => {
                failures += 1;
                ("FAIL", detail)
            }
        };
        println!("criterion {number} {status}: {name}: {detail} [{secs:.1}s]");
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}

fn panic_message(e: Box<dyn std::any::Any + Send>) -> String {
    let text = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
    format!("panicked: {}", text.unwrap_or_default())
}

fn verdict(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---- running the binary ----

fn corder_in(dir: &Path, args: &[&str]) -> Result<Output, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_corder")).args(args).current_dir(dir).output().map_err(|e| e.to_string())?;
    Ok(out)
}

fn run_in(dir: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = corder_in(dir, args)?;
    if !out.status.success() {
        return Err(format!("`corder {}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim()));
    }
    Ok(out.stdout)
}

fn json(bytes: &[u8]) -> Result<Value, String> {
    serde_json::from_slice(bytes).map_err(|e| format!("stdout is not JSON: {e}"))
}

fn number(v: &Value, key: &str) -> Result<f64, String> {
    v[key].as_f64().ok_or_else(|| format!("missing `{key}`"))
}

impl Context {
    fn corpus(&self) -> Result<PathBuf, String> {
        let path = self.dir.join("corpus.jsonl");
        if !path.exists() {
            run_in(&self.dir, &["gen-corpus", "--families", "10", "--variants-per-family", "50", "--seed", "42", "--out", "corpus.jsonl"])?;
        }
        Ok(path)
    }
}

// ---- 1 ----

fn semantic_preservation(ctx: &Context) -> Result<String, String> {
    ctx.corpus()?;
    let start = Instant::now();
    let out = corder_in(&ctx.dir, &["verify", "--in", "corpus.jsonl", "--ops", "VR,US,PS,LX,SF", "--trials", "20", "--seed", "42"])?;
    let elapsed = start.elapsed();
    let report = json(&out.stdout)?;
    let total = &report["total"];
    let views = number(total, "views")?;
    let inequivalent = number(total, "inequivalent")?;
    let inconclusive = number(total, "inconclusive")?;
    let operators = report["operators"].as_object().map_or(0, |o| o.len());
    let detail = format!(
        "{views} views over {operators} operators, {inequivalent} inequivalent, {inconclusive} inconclusive, {:.1}s",
        elapsed.as_secs_f64()
    );
    let ok = out.status.success()
        && operators == 5
        && views > 0.0
        && inequivalent == 0.0
        && inconclusive / views < 0.01
        && elapsed < Duration::from_secs(300);
    verdict(ok, detail)
}

// ---- 2 ----

/// Central difference of the loss along coordinate `i` with step `epsilon`.
fn central(forest: &Forest, probe: &mut EncoderParams, theta: &[f64], i: usize, epsilon: f64) -> f64 {
    let mut flat = theta.to_vec();
    let mut loss_at = |x: f64| {
        flat[i] = x;
        probe.unflatten(&flat);
        nt_xent(&forward(forest, probe).0, 1.0).unwrap().0
    };
    (loss_at(theta[i] + epsilon) - loss_at(theta[i] - epsilon)) / (2.0 * epsilon)
}

/// Richardson extrapolation of two central differences, cancelling the
/// `ε²` truncation term that dominates where small pooled vectors make the
/// cosine sharply curved.
fn numeric_gradient(forest: &Forest, probe: &mut EncoderParams, theta: &[f64], i: usize) -> f64 {
    const EPSILON: f64 = 1e-6;
    let coarse = central(forest, probe, theta, i, EPSILON);
    let fine = central(forest, probe, theta, i, EPSILON / 2.0);
    (4.0 * fine - coarse) / 3.0
}

fn gradient_correctness(_: &Context) -> Result<String, String> {
    let config = EncoderConfig { dim: 8, steps: 2, vocab: 32 };
    let pool = NamePool::default();
    let mut rng = Pcg32::seeded(42);
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for _ in 0..50 {
        let pairs = 1 + rng.index(3);
        let mut trees = Vec::new();
        while trees.len() < 2 * pairs {
            let tree = random_program(&mut rng, &RandomProgramConfig { max_block_len: 3, max_stmt_depth: 2, ..Default::default() });
            if let Ok((a, b)) = sample_views(&tree, &OperatorTag::all(), "batch", rng.next_u64(), &pool) {
                trees.push(a.tree);
                trees.push(b.tree);
            }
        }
        let params = EncoderParams::init(config, rng.next_u64());
        let forest = Forest::new(&trees, config.vocab);
        let (pooled, cache) = forward(&forest, &params);
        let (_, d_pooled) = nt_xent(&pooled, 1.0).unwrap();
        let mut grads = EncoderParams::zeros(config);
        backward(&forest, &params, &cache, &d_pooled, &mut grads);
        let analytic = grads.flatten();
        let theta = params.flatten();
        let mut probe = params.clone();
        for i in 0..theta.len() {
            let numeric = numeric_gradient(&forest, &mut probe, &theta, i);
            if numeric == 0.0 && analytic[i] == 0.0 {
                continue;
            }
            checked += 1;
            worst = worst.max((analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-5));
        }
    }
    verdict(worst < 1e-4, format!("50 batches, {checked} live parameters, max relative error {worst:.2e}"))
}

// ---- 3 ----

fn loss_formula(_: &Context) -> Result<String, String> {
    let mut rng = Pcg32::seeded(3);
    let random_rows = |rng: &mut Pcg32, n: usize| -> Vec<Vec<f64>> { (0..n).map(|_| (0..6).map(|_| rng.uniform(-1.0, 1.0)).collect()).collect() };
    let loss = |rows: &[Vec<f64>]| nt_xent(&Matrix::from_rows(rows).unwrap(), 1.0).unwrap().0;

    let single = loss(&random_rows(&mut rng, 2));
    let orthogonal = loss(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]);
    let expected = (1.0 + 2.0 / std::f64::consts::E).ln();
    let mut worst_scale = 0.0f64;
    for _ in 0..20 {
        let rows = random_rows(&mut rng, 8);
        let before = loss(&rows);
        let mut scaled = rows.clone();
        let which = rng.index(scaled.len());
        scaled[which].iter_mut().for_each(|x| *x *= 3.0);
        let all: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| 3.0 * x).collect()).collect();
        worst_scale = worst_scale.max((loss(&scaled) - before).abs()).max((loss(&all) - before).abs());
    }
    let detail = format!(
        "N=1 loss {single}, orthogonal N=2 off by {:.1e}, max change under scaling {worst_scale:.1e}",
        (orthogonal - expected).abs()
    );
    verdict(single == 0.0 && (orthogonal - expected).abs() <= 1e-9 && worst_scale < 1e-9, detail)
}

// ---- 4 and 5 ----

struct Metrics {
    mrr: f64,
    map: f64,
}

struct Pretrained {
    train_time: Duration,
    total_time: Duration,
    trained: Metrics,
    random: Metrics,
    alignment: f64,
}

fn embed_and_score(dir: &Path, checkpoint: &str, tag: &str) -> Result<Metrics, String> {
    let views = format!("{tag}-views.jsonl");
    let originals = format!("{tag}-originals.jsonl");
    run_in(dir, &["embed", "--checkpoint", checkpoint, "--in", "corpus.jsonl", "--views", "--seed", "42", "--out", &views])?;
    run_in(dir, &["embed", "--checkpoint", checkpoint, "--in", "corpus.jsonl", "--out", &originals])?;
    let mrr = json(&run_in(dir, &["eval-retrieval", "--embeddings", &views, "--protocol", "mrr", "--k", "10"])?)?;
    let map = json(&run_in(dir, &["eval-retrieval", "--embeddings", &originals, "--protocol", "map", "--k", "10"])?)?;
    Ok(Metrics { mrr: number(&mrr, "metric")?, map: number(&map, "metric")? })
}

fn read_vectors(path: &Path) -> Result<Vec<(String, Option<String>, Vec<f64>)>, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    text.lines()
        .map(|line| {
            let v: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
            let vector = v["vector"].as_array().ok_or("missing vector")?.iter().map(|x| x.as_f64().unwrap_or(f64::NAN)).collect();
            Ok((v["id"].as_str().unwrap_or_default().to_string(), v["label"].as_str().map(str::to_string), vector))
        })
        .collect()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na * nb == 0.0 { 0.0 } else { dot / (na * nb) }
}

/// Mean cosine of same-snippet view pairs minus that of cross-snippet pairs.
fn alignment(path: &Path) -> Result<f64, String> {
    let records = read_vectors(path)?;
    let first: Vec<&Vec<f64>> = records.iter().filter(|r| r.0.ends_with("::view1")).map(|r| &r.2).collect();
    let second: Vec<&Vec<f64>> = records.iter().filter(|r| r.0.ends_with("::view2")).map(|r| &r.2).collect();
    let n = first.len();
    let (mut same, mut cross) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let c = cosine(first[i], second[j]);
            if i == j {
                same += c;
            } else {
                cross += c;
            }
        }
    }
    Ok(same / n as f64 - cross / (n * (n - 1)) as f64)
}

fn pretrained(ctx: &Context) -> Result<&Pretrained, String> {
    ctx.pretrained
        .get_or_init(|| {
            ctx.corpus()?;
            let start = Instant::now();
            run_in(&ctx.dir, &["pretrain", "--corpus", "corpus.jsonl", "--seed", "42", "--out", "trained.ckpt", "--loss-csv", "loss.csv"])?;
            let train_time = start.elapsed();
            let trained = embed_and_score(&ctx.dir, "trained.ckpt", "trained")?;
            let total_time = start.elapsed();
            run_in(&ctx.dir, &["pretrain", "--corpus", "corpus.jsonl", "--seed", "42", "--steps", "0", "--out", "random.ckpt"])?;
            let random = embed_and_score(&ctx.dir, "random.ckpt", "random")?;
            let alignment = alignment(&ctx.dir.join("trained-views.jsonl"))?;
            Ok(Pretrained { train_time, total_time, trained, random, alignment })
        })
        .as_ref()
        .map_err(Clone::clone)
}

fn retrieval_effect(ctx: &Context) -> Result<String, String> {
    let p = pretrained(ctx)?;
    let (t, r) = (&p.trained, &p.random);
    let detail = format!(
        "MRR@10 trained {:.4} vs random {:.4} (gap {:+.4}); MAP@10 trained {:.4} vs random {:.4} (gap {:+.4}); \
         alignment {:.4}; pretraining {:.0}s, with evaluation {:.0}s",
        t.mrr,
        r.mrr,
        t.mrr - r.mrr,
        t.map,
        r.map,
        t.map - r.map,
        p.alignment,
        p.train_time.as_secs_f64(),
        p.total_time.as_secs_f64()
    );
    let ok = t.mrr >= 0.90 && t.mrr - r.mrr >= 0.25 && t.map - r.map >= 0.15 && p.total_time < Duration::from_secs(15 * 60);
    verdict(ok, detail)
}

/// Splits `<tag>-originals.jsonl` by variant number: 0..40 train, 40.. test.
fn probe_accuracy(dir: &Path, tag: &str) -> Result<f64, String> {
    let text = fs::read_to_string(dir.join(format!("{tag}-originals.jsonl"))).map_err(|e| e.to_string())?;
    let (mut train, mut test) = (String::new(), String::new());
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let id = v["id"].as_str().ok_or("missing id")?;
        let variant: usize = id.rsplit('-').next().and_then(|s| s.parse().ok()).ok_or_else(|| format!("bad id {id}"))?;
        let target = if variant < 40 { &mut train } else { &mut test };
        target.push_str(line);
        target.push('\n');
    }
    let (train_path, test_path) = (format!("{tag}-probe-train.jsonl"), format!("{tag}-probe-test.jsonl"));
    fs::write(dir.join(&train_path), train).map_err(|e| e.to_string())?;
    fs::write(dir.join(&test_path), test).map_err(|e| e.to_string())?;
    let report = json(&run_in(dir, &["eval-probe", "--train", &train_path, "--test", &test_path])?)?;
    number(&report, "accuracy")
}

fn linear_probe(ctx: &Context) -> Result<String, String> {
    pretrained(ctx)?;
    let trained = probe_accuracy(&ctx.dir, "trained")?;
    let random = probe_accuracy(&ctx.dir, "random")?;
    let detail = format!("accuracy trained {trained:.4} vs random {random:.4} (gap {:+.4})", trained - random);
    verdict(trained >= 0.80 && trained - random >= 0.10, detail)
}

// ---- 6 ----

/// Steps per single-operator run; the runs check completion and schema.
const ABLATION_STEPS: &str = "50";

fn ablation(ctx: &Context) -> Result<String, String> {
    ctx.corpus()?;
    let census = json(&run_in(&ctx.dir, &["transform", "--in", "corpus.jsonl", "--out", "views.jsonl"])?)?;
    let census_rows = census["census"].as_array().map_or(0, |r| r.len());
    let csv = String::from_utf8(run_in(&ctx.dir, &["ablate", "--corpus", "corpus.jsonl", "--steps", ABLATION_STEPS])?)
        .map_err(|e| e.to_string())?;
    let mut lines = csv.lines();
    if lines.next() != Some("op,applicable,total,steps,final_loss,mrr,map,status") {
        return Err("unexpected CSV header".into());
    }
    let mut ops = Vec::new();
    let mut summary = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(format!("malformed row `{line}`"));
        }
        let counts_ok = fields[1].parse::<usize>().is_ok() && fields[2] == "500" && fields[3] == ABLATION_STEPS;
        let metrics_ok = fields[4..7].iter().all(|f| f.parse::<f64>().is_ok_and(|x| x.is_finite()));
        if !counts_ok || !metrics_ok || fields[7] != "ok" {
            return Err(format!("row `{line}` did not complete"));
        }
        ops.push(fields[0].to_string());
        summary.push(format!("{} mrr {:.3}", fields[0], fields[5].parse::<f64>().unwrap_or(f64::NAN)));
    }
    verdict(ops == ["VR", "US", "PS", "LX", "SF"] && census_rows == 5, format!("{} steps each: {}", ABLATION_STEPS, summary.join(", ")))
}

// ---- 7 ----

fn metric_oracles(_: &Context) -> Result<String, String> {
    let mut rng = Pcg32::seeded(77);
    let (mut results, mut targets, mut relevant) = (Vec::new(), Vec::new(), Vec::new());
    let mut worst = 0.0f64;
    let (mut rr_sum, mut ap_sum, mut p_sum) = (0.0, 0.0, 0.0);
    const CUTOFF: usize = 10;
    for _ in 0..1000 {
        let universe = 1 + rng.index(40);
        let mut ids: Vec<String> = (0..universe).map(|i| format!("item{i}")).collect();
        rng.shuffle(&mut ids);
        ids.truncate(rng.index(universe + 1));
        let rel: BTreeSet<String> = (0..universe).filter(|_| rng.coin()).map(|i| format!("item{i}")).collect();
        let target = format!("item{}", rng.index(universe));

        let mut rr = 0.0;
        for (i, id) in ids.iter().enumerate() {
            if *id == target {
                rr = 1.0 / (i + 1) as f64;
                break;
            }
        }
        let mut ap = 0.0;
        for i in 0..ids.len().min(CUTOFF) {
            if rel.contains(&ids[i]) {
                ap += ids[..=i].iter().filter(|x| rel.contains(*x)).count() as f64 / (i + 1) as f64;
            }
        }
        let denom = rel.len().min(CUTOFF);
        let ap = if denom == 0 { 0.0 } else { ap / denom as f64 };
        let p = (0..CUTOFF).filter(|&i| i < ids.len() && rel.contains(&ids[i])).count() as f64 / CUTOFF as f64;

        worst = worst.max((reciprocal_rank(&ids, &target) - rr).abs()).max((average_precision(&ids, &rel, CUTOFF) - ap).abs());
        rr_sum += rr;
        ap_sum += ap;
        p_sum += p;
        results.push(ids);
        targets.push(target);
        relevant.push(rel);
    }
    let n = results.len() as f64;
    worst = worst
        .max((mrr(&results, &targets).unwrap() - rr_sum / n).abs())
        .max((map(&results, &relevant, CUTOFF).unwrap() - ap_sum / n).abs())
        .max((precision_at_k(&results, &relevant, CUTOFF).unwrap() - p_sum / n).abs());
    verdict(worst <= 1e-12, format!("1000 rankings, max deviation {worst:.1e}"))
}

// ---- 8 ----

fn pipeline_outputs(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let steps: &[&[&str]] = &[
        &["gen-corpus", "--seed", "42", "--out", "corpus.jsonl"],
        &["transform", "--in", "corpus.jsonl", "--seed", "42", "--out", "views.jsonl"],
        &["verify", "--in", "corpus.jsonl", "--views", "views.jsonl", "--seed", "42"],
        &["pretrain", "--corpus", "corpus.jsonl", "--seed", "42", "--steps", "20", "--out", "model.ckpt", "--loss-csv", "loss.csv"],
        &["embed", "--checkpoint", "model.ckpt", "--in", "corpus.jsonl", "--out", "originals.jsonl"],
        &["embed", "--checkpoint", "model.ckpt", "--in", "corpus.jsonl", "--views", "--seed", "42", "--out", "pairs.jsonl"],
        &["eval-retrieval", "--embeddings", "pairs.jsonl", "--protocol", "mrr"],
        &["eval-retrieval", "--embeddings", "originals.jsonl", "--protocol", "map"],
        &["eval-probe", "--train", "originals.jsonl", "--test", "originals.jsonl"],
    ];
    fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for args in steps {
        outputs.push((format!("stdout of {}", args[0]), run_in(dir, args)?));
    }
    for file in ["corpus.jsonl", "views.jsonl", "model.ckpt", "loss.csv", "originals.jsonl", "pairs.jsonl"] {
        outputs.push((file.to_string(), fs::read(dir.join(file)).map_err(|e| e.to_string())?));
    }
    Ok(outputs)
}

fn determinism(ctx: &Context) -> Result<String, String> {
    let first = pipeline_outputs(&ctx.dir.join("run-a"))?;
    let second = pipeline_outputs(&ctx.dir.join("run-b"))?;
    let differing: Vec<&str> = first.iter().zip(&second).filter(|(a, b)| a.1 != b.1).map(|(a, _)| a.0.as_str()).collect();
    let bytes: usize = first.iter().map(|(_, b)| b.len()).sum();
    if differing.is_empty() {
        Ok(format!("{} artifacts ({bytes} bytes) byte-identical across two seed-42 runs of 20 steps", first.len()))
    } else {
        Err(format!("differing: {}", differing.join(", ")))
    }
}

// ---- 9 ----

fn syntax_round_trip(_: &Context) -> Result<String, String> {
    let mut rng = Pcg32::seeded(9);
    let config = RandomProgramConfig::default();
    for i in 0..10_000 {
        let tree = random_program(&mut rng, &config);
        let text = print(&tree);
        let reparsed = parse_source(&text).map_err(|e| format!("program {i} does not reparse: {e}"))?;
        if reparsed != tree || print(&reparsed) != text {
            return Err(format!("program {i} changed on round trip"));
        }
    }
    for _ in 0..10_000 {
        let len = rng.index(200);
        let bytes: Vec<u8> = (0..len).map(|_| rng.below(256) as u8).collect();
        let _ = parse_source(&String::from_utf8_lossy(&bytes));
    }
    for _ in 0..10_000 {
        let tree = random_program(&mut rng, &config);
        let mut lexemes: Vec<String> =
            lex(&print(&tree)).unwrap().into_iter().map(|t| t.lexeme).filter(|l| l != EOF_LEXEME).collect();
        for _ in 0..1 + rng.index(5) {
            let i = rng.index(lexemes.len());
            match rng.index(3) {
                0 => drop(lexemes.remove(i)),
                1 => lexemes.insert(i, lexemes[i].clone()),
                _ => {
                    let j = rng.index(lexemes.len());
                    lexemes.swap(i, j);
                }
            }
            if lexemes.is_empty() {
                break;
            }
        }
        let _ = parse_source(&lexemes.join(" "));
    }
    Ok("10000 programs round-trip; 10000 byte strings and 10000 token mutations parsed without panics".into())
}
