use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use corder_core::contrastive::{load_checkpoint, train_with, write_loss_csv, ContrastiveError};
use corder_core::corpus::{generate_corpus, load, parse_records, write_jsonl, MAX_FAMILIES};
use corder_core::evalkit::{
    accuracy, knn, label_mate_map, per_class_precision, read_embeddings, train_probe, view_pair_mrr, EmbeddingRecord,
    ProbeConfig, RetrievalIndex,
};
use corder_core::interp::{equivalent, Value, Verdict};
use corder_core::numerics::{fnv1a64, mix64};
use corder_core::transform::NamePool;
use corder_core::{parse_source, OperatorTag, Snippet};

use crate::config::{RunConfig, RunOverrides, DEFAULT_SEED};
use crate::views::{census, census_table, embed_snippets, embed_view_pairs, operator_views, ViewRecord};
use crate::Protocol;

/// Writes `text` to `path`, or to stdout when `path` is `None`.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn jsonl<T: Serialize>(items: &[T]) -> Result<String> {
    let mut text = String::new();
    for item in items {
        text.push_str(&serde_json::to_string(item)?);
        text.push('\n');
    }
    Ok(text)
}

fn json_line(value: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn read_snippets(path: &Path) -> Result<Vec<Snippet>> {
    let records = load(path).with_context(|| format!("loading corpus {}", path.display()))?;
    Ok(parse_records(&records)?)
}

fn read_views(path: &Path) -> Result<Vec<ViewRecord>> {
    let file = io::BufReader::new(fs::File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut out = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?);
        }
    }
    Ok(out)
}

fn read_vectors(path: &Path) -> Result<Vec<EmbeddingRecord>> {
    read_embeddings(path).with_context(|| format!("reading embeddings {}", path.display()))
}

pub fn gen_corpus(families: usize, variants: usize, seed: u64, out: Option<&Path>) -> Result<()> {
    let records = generate_corpus(families, variants, seed)?;
    match out {
        Some(p) => write_jsonl(p, &records)?,
        None => emit(None, &jsonl(&records)?)?,
    }
    eprintln!("generated {} programs in {} families (max {MAX_FAMILIES})", records.len(), families);
    Ok(())
}

pub fn transform(input: &Path, ops: &str, seed: u64, out: &Path) -> Result<()> {
    let ops = OperatorTag::parse_list(ops)?;
    let snippets = read_snippets(input)?;
    let pool = NamePool::harvest(snippets.iter().map(|s| &s.tree));
    let views = operator_views(&snippets, &ops, seed, &pool)?;
    emit(Some(out), &jsonl(&views)?)?;
    let rows = census(&snippets, &ops);
    eprint!("{}", census_table(&rows));
    eprintln!("wrote {} views for {} snippets", views.len(), snippets.len());
    emit(None, &json_line(&json!({ "views": views.len(), "snippets": snippets.len(), "census": rows }))?)
}

fn value_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Int(x) => json!(x),
        Value::Bool(b) => json!(b),
        Value::IntArray(a) => json!(a.as_slice()),
    }
}

#[derive(Debug, Default, Serialize)]
struct VerdictCounts {
    views: usize,
    equivalent: usize,
    inconclusive: usize,
    inequivalent: usize,
}

/// Returns `Ok(false)` when some view is inequivalent to its origin.
pub fn verify(input: &Path, views: Option<&Path>, ops: &str, trials: usize, seed: u64) -> Result<bool> {
    let ops = OperatorTag::parse_list(ops)?;
    let snippets = read_snippets(input)?;
    let views = match views {
        Some(path) => read_views(path)?.into_iter().filter(|v| ops.contains(&v.op)).collect(),
        None => {
            let pool = NamePool::harvest(snippets.iter().map(|s| &s.tree));
            operator_views(&snippets, &ops, seed, &pool)?
        }
    };
    let by_id: HashMap<&str, &Snippet> = snippets.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut per_op: BTreeMap<OperatorTag, VerdictCounts> = ops.iter().map(|op| (*op, VerdictCounts::default())).collect();
    let mut failures = Vec::new();
    for view in &views {
        let origin = by_id.get(view.origin_id.as_str()).with_context(|| format!("view of unknown snippet `{}`", view.origin_id))?;
        let counts = per_op.get_mut(&view.op).expect("filtered to ops");
        counts.views += 1;
        let trial_seed = mix64(seed, fnv1a64(view.origin_id.as_bytes()), view.op.bit() as u64);
        let verdict = match parse_source(&view.code) {
            Ok(tree) => equivalent(&origin.tree, &tree, origin.entry(), trials, trial_seed).map_err(|e| e.to_string()),
            Err(e) => Err(format!("view does not parse: {e}")),
        };
        match verdict {
            Ok(Verdict::Equivalent) => counts.equivalent += 1,
            Ok(Verdict::Inconclusive) => counts.inconclusive += 1,
            Ok(Verdict::Inequivalent(args)) => {
                counts.inequivalent += 1;
                let args: Vec<_> = args.iter().map(value_json).collect();
                failures.push(json!({ "origin_id": view.origin_id, "op": view.op, "seed": view.seed, "args": args }));
            }
            Err(reason) => {
                counts.inequivalent += 1;
                failures.push(json!({ "origin_id": view.origin_id, "op": view.op, "seed": view.seed, "error": reason }));
            }
        }
    }
    let total = per_op.values().fold(VerdictCounts::default(), |mut t, c| {
        t.views += c.views;
        t.equivalent += c.equivalent;
        t.inconclusive += c.inconclusive;
        t.inequivalent += c.inequivalent;
        t
    });
    eprintln!(
        "{} views: {} equivalent, {} inconclusive, {} inequivalent",
        total.views, total.equivalent, total.inconclusive, total.inequivalent
    );
    let ok = total.inequivalent == 0;
    let report = json!({ "trials": trials, "seed": seed, "operators": per_op, "total": total, "inequivalent": failures });
    emit(None, &json_line(&report)?)?;
    Ok(ok)
}

fn resolve(config: Option<&Path>, overrides: RunOverrides) -> Result<RunConfig> {
    let file = config.map(RunOverrides::from_file).transpose()?;
    RunConfig::resolve(overrides, file)
}

/// The corpus named by the configuration, or the default generated one.
fn run_corpus(config: &RunConfig) -> Result<Vec<Snippet>> {
    match &config.corpus {
        Some(path) => read_snippets(path),
        None => Ok(parse_records(&generate_corpus(MAX_FAMILIES, 50, DEFAULT_SEED)?)?),
    }
}

pub fn pretrain(config: Option<&Path>, overrides: RunOverrides) -> Result<()> {
    let config = resolve(config, overrides)?;
    let snippets = run_corpus(&config)?;
    let train_config = config.train_config();
    let steps = train_config.steps;
    let every = (steps / 20).max(1);
    let outcome = train_with(&snippets, &train_config, Some(&config.checkpoint), |step, loss| {
        if (step + 1) % every == 0 || step + 1 == steps {
            eprintln!("step {:>5}/{steps}  loss {loss:.6}", step + 1);
        }
    })?;
    if let Some(path) = &config.loss_csv {
        write_loss_csv(path, &outcome.losses).with_context(|| format!("writing {}", path.display()))?;
    }
    let final_loss = outcome.losses.last().copied();
    match final_loss {
        Some(loss) => eprintln!("final loss {loss:.6}"),
        None => eprintln!("no steps run; checkpoint holds the initial parameters"),
    }
    let ops: Vec<_> = config.ops.iter().collect();
    emit(
        None,
        &json_line(&json!({
            "checkpoint": config.checkpoint,
            "steps": outcome.checkpoint.step,
            "final_loss": final_loss,
            "seed": config.seed,
            "ops": ops,
        }))?,
    )
}

pub fn embed(checkpoint: &Path, input: &Path, out: Option<&Path>, views: bool, ops: &str, seed: u64) -> Result<()> {
    let ops = OperatorTag::parse_list(ops)?;
    let checkpoint = load_checkpoint(checkpoint).with_context(|| format!("loading checkpoint {}", checkpoint.display()))?;
    let snippets = read_snippets(input)?;
    let records = if views {
        let pool = NamePool::harvest(snippets.iter().map(|s| &s.tree));
        let (records, skipped) = embed_view_pairs(&snippets, &checkpoint.params, &ops, seed, &pool)?;
        if skipped > 0 {
            eprintln!("skipped {skipped} snippets with no applicable operator");
        }
        records
    } else {
        embed_snippets(&snippets, &checkpoint.params)
    };
    emit(out, &jsonl(&records)?)?;
    eprintln!("embedded {} records of dimension {}", records.len(), checkpoint.params.config.dim);
    Ok(())
}

pub fn search(index: &Path, query_file: &Path, checkpoint: Option<&Path>, k: usize) -> Result<()> {
    if k == 0 {
        bail!("k must be at least 1");
    }
    let index = RetrievalIndex::from_records(&read_vectors(index)?)?;
    let queries = match checkpoint {
        Some(path) => {
            let checkpoint = load_checkpoint(path)?;
            embed_snippets(&read_snippets(query_file)?, &checkpoint.params)
        }
        None => read_vectors(query_file)?,
    };
    let mut results = Vec::with_capacity(queries.len());
    for q in &queries {
        let hits: Vec<_> = knn(&index, &q.vector, k)?.hits.into_iter().map(|(id, score)| json!({ "id": id, "score": score })).collect();
        results.push(json!({ "query": q.id, "hits": hits }));
    }
    eprintln!("{} queries against {} indexed vectors", queries.len(), index.len());
    emit(None, &json_line(&results)?)
}

pub fn eval_retrieval(embeddings: &Path, protocol: Protocol, k: usize) -> Result<()> {
    let records = read_vectors(embeddings)?;
    let report = match protocol {
        Protocol::Map => label_mate_map(&records, k)?,
        Protocol::Mrr => view_pair_mrr(&records, k)?,
    };
    eprintln!("{}@{} = {:.4} over {} queries", report.protocol, report.cutoff, report.metric, report.queries.len());
    emit(None, &json_line(&report)?)
}

fn labelled(records: Vec<EmbeddingRecord>) -> Result<(Vec<Vec<f64>>, Vec<String>)> {
    let mut x = Vec::with_capacity(records.len());
    let mut y = Vec::with_capacity(records.len());
    for r in records {
        let Some(label) = r.label else { bail!("record `{}` has no label", r.id) };
        x.push(r.vector);
        y.push(label);
    }
    Ok((x, y))
}

pub fn eval_probe(train: &Path, test: &Path, epochs: usize, lr: f64, standardize: bool) -> Result<()> {
    let (train_x, train_y) = labelled(read_vectors(train)?)?;
    let (test_x, test_y) = labelled(read_vectors(test)?)?;
    let config = ProbeConfig { epochs, learning_rate: lr, standardize };
    let model = train_probe(&train_x, &train_y, &config)?;
    let acc = accuracy(&model, &test_x, &test_y)?;
    let precision: BTreeMap<String, Option<f64>> = per_class_precision(&model, &test_x, &test_y)?.into_iter().collect();
    eprintln!("probe accuracy {acc:.4} on {} test records ({} classes)", test_x.len(), model.classes.len());
    emit(
        None,
        &json_line(&json!({
            "accuracy": acc,
            "train_size": train_x.len(),
            "test_size": test_x.len(),
            "classes": model.classes,
            "per_class_precision": precision,
            "epochs": epochs,
            "learning_rate": lr,
            "standardize": standardize,
        }))?,
    )
}

fn csv_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn ablate(config: Option<&Path>, overrides: RunOverrides) -> Result<()> {
    let config = resolve(config, overrides)?;
    let snippets = run_corpus(&config)?;
    let pool = NamePool::harvest(snippets.iter().map(|s| &s.tree));
    let all = OperatorTag::all();
    let rows = census(&snippets, &all);
    eprint!("{}", census_table(&rows));
    let mut table = String::from("op,applicable,total,steps,final_loss,mrr,map,status\n");
    for row in &rows {
        let mut run = config.train_config();
        run.ops = [row.op].into();
        eprintln!("pretraining with {} only", row.op);
        let line = match train_with(&snippets, &run, None, |_, _| {}) {
            Ok(outcome) => {
                let params = &outcome.checkpoint.params;
                let (pairs, _) = embed_view_pairs(&snippets, params, &all, config.seed, &pool)?;
                let mrr = view_pair_mrr(&pairs, config.cutoff)?.metric;
                let map = label_mate_map(&embed_snippets(&snippets, params), config.cutoff).ok().map(|r| r.metric);
                let loss = outcome.losses.last().copied();
                format!("{},{},{},{},{},{},{},ok", row.op, row.applicable, row.total, run.steps, csv_field(loss), mrr, csv_field(map))
            }
            Err(e @ ContrastiveError::InsufficientCorpus { .. }) => {
                eprintln!("{}: {e}", row.op);
                format!("{},{},{},{},,,,insufficient_corpus", row.op, row.applicable, row.total, run.steps)
            }
            Err(e) => return Err(e.into()),
        };
        table.push_str(&line);
        table.push('\n');
    }
    emit(None, &table)
}
