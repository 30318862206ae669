//! Retrieval index, ranking metrics, the logistic-regression probe and the
//! JSON-lines embedding exchange format.

mod index;
mod metrics;
mod probe;

pub use index::{knn, knn_excluding, QueryResult, RetrievalIndex};
pub use metrics::{average_precision, map, mrr, precision_at_k, reciprocal_rank};
pub use probe::{accuracy, per_class_precision, predict, train_probe, ProbeConfig, ProbeModel};

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encoder::CodeVector;

pub const DEFAULT_CUTOFF: usize = 10;
/// Suffixes marking the query and target view of a snippet in view-pair files.
pub const QUERY_VIEW_SUFFIX: &str = "::view1";
pub const TARGET_VIEW_SUFFIX: &str = "::view2";

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("vector has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("index is empty")]
    EmptyIndex,
    #[error("no queries to evaluate")]
    EmptyQuerySet,
    #[error("probe needs at least two classes")]
    SingleClass,
    #[error("cutoff must be at least 1")]
    ZeroCutoff,
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("non-finite vector for `{0}`")]
    NonFinite(String),
    #[error("{left} results but {right} relevance entries")]
    LengthMismatch { left: usize, right: usize },
    #[error("record `{0}` has no label")]
    MissingLabel(String),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One line of an embeddings file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub vector: CodeVector,
}

pub fn read_embeddings(path: &Path) -> Result<Vec<EmbeddingRecord>, EvalError> {
    let file = io::BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line).map_err(|source| EvalError::Json { line: i + 1, source })?);
        }
    }
    Ok(out)
}

pub fn write_embeddings(path: &Path, records: &[EmbeddingRecord]) -> Result<(), EvalError> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut out, record).map_err(io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Per-query outcome of a retrieval protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryScore {
    pub query: String,
    pub score: f64,
    pub ranked: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrievalReport {
    pub protocol: String,
    pub cutoff: usize,
    pub metric: f64,
    pub queries: Vec<QueryScore>,
}

/// Label-mate MAP: every labelled record queries all others; records sharing
/// its label are relevant. Records without label-mates are not queried.
pub fn label_mate_map(records: &[EmbeddingRecord], cutoff: usize) -> Result<RetrievalReport, EvalError> {
    let index = RetrievalIndex::from_records(records)?;
    let mut by_label: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for r in records {
        let label = r.label.as_deref().ok_or_else(|| EvalError::MissingLabel(r.id.clone()))?;
        by_label.entry(label).or_default().insert(r.id.clone());
    }
    let mut queries = Vec::new();
    for r in records {
        let mut relevant = by_label[r.label.as_deref().expect("checked")].clone();
        relevant.remove(&r.id);
        if relevant.is_empty() {
            continue;
        }
        let ranked = knn_excluding(&index, &r.vector, cutoff, Some(&r.id))?.ids();
        let score = average_precision(&ranked, &relevant, cutoff);
        queries.push(QueryScore { query: r.id.clone(), score, ranked });
    }
    report("map", cutoff, queries)
}

/// View-pair MRR: each `<id>::view1` record queries the index of all
/// `<id>::view2` records; the relevant item is its own second view.
pub fn view_pair_mrr(records: &[EmbeddingRecord], cutoff: usize) -> Result<RetrievalReport, EvalError> {
    let targets: Vec<EmbeddingRecord> = records
        .iter()
        .filter_map(|r| r.id.strip_suffix(TARGET_VIEW_SUFFIX).map(|o| EmbeddingRecord { id: o.to_string(), ..r.clone() }))
        .collect();
    let index = RetrievalIndex::from_records(&targets)?;
    let mut queries = Vec::new();
    for r in records {
        let Some(origin) = r.id.strip_suffix(QUERY_VIEW_SUFFIX) else {
            continue;
        };
        let ranked = knn(&index, &r.vector, cutoff)?.ids();
        let score = reciprocal_rank(&ranked, origin);
        queries.push(QueryScore { query: origin.to_string(), score, ranked });
    }
    report("mrr", cutoff, queries)
}

fn report(protocol: &str, cutoff: usize, queries: Vec<QueryScore>) -> Result<RetrievalReport, EvalError> {
    if queries.is_empty() {
        return Err(EvalError::EmptyQuerySet);
    }
    let metric = queries.iter().map(|q| q.score).sum::<f64>() / queries.len() as f64;
    Ok(RetrievalReport { protocol: protocol.to_string(), cutoff, metric, queries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, label: &str, vector: Vec<f64>) -> EmbeddingRecord {
        EmbeddingRecord { id: id.into(), label: Some(label.into()), vector }
    }

    #[test]
    fn duplicated_label_mates_give_perfect_map() {
        let records = vec![
            rec("a1", "a", vec![1.0, 0.0]),
            rec("a2", "a", vec![1.0, 0.0]),
            rec("b1", "b", vec![0.0, 1.0]),
            rec("b2", "b", vec![0.0, 1.0]),
            rec("c1", "c", vec![-1.0, -1.0]),
        ];
        let report = label_mate_map(&records, 10).unwrap();
        assert_eq!(report.metric, 1.0);
        assert_eq!(report.queries.len(), 4);
    }

    #[test]
    fn view_pairs() {
        let records = vec![
            rec("p::view1", "x", vec![1.0, 0.1]),
            rec("p::view2", "x", vec![1.0, 0.0]),
            rec("q::view1", "x", vec![0.0, 1.0]),
            rec("q::view2", "x", vec![0.1, 1.0]),
        ];
        let report = view_pair_mrr(&records, 10).unwrap();
        assert_eq!(report.metric, 1.0);
        assert_eq!(report.queries[0].ranked, vec!["p", "q"]);
    }

    #[test]
    fn exchange_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.jsonl");
        let records = vec![rec("a", "x", vec![0.1, -2.5e-17]), EmbeddingRecord { id: "b".into(), label: None, vector: vec![1.0, 2.0] }];
        write_embeddings(&path, &records).unwrap();
        assert_eq!(read_embeddings(&path).unwrap(), records);
    }

    #[test]
    fn empty_protocols() {
        assert!(matches!(view_pair_mrr(&[rec("a::view2", "x", vec![1.0])], 10), Err(EvalError::EmptyQuerySet)));
        assert!(matches!(label_mate_map(&[rec("a", "x", vec![1.0])], 10), Err(EvalError::EmptyQuerySet)));
    }
}
