//! Per-operator view generation, the applicability census and embedding helpers.

use std::collections::BTreeSet;

use anyhow::Result;
use serde::{Deserialize, Serialize};

use corder_core::encoder::encode_many;
use corder_core::evalkit::{EmbeddingRecord, QUERY_VIEW_SUFFIX, TARGET_VIEW_SUFFIX};
use corder_core::transform::{applicable, apply, sample_views, view_seed, NamePool};
use corder_core::{print, EncoderParams, OperatorTag, Snippet};

/// Offset of per-operator view indices, clear of the two-view sampler's 0..=2.
const OPERATOR_VIEW_BASE: u64 = 16;

/// One line of a view file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewRecord {
    pub origin_id: String,
    pub op: OperatorTag,
    pub seed: u64,
    pub code: String,
}

/// Seed of the `op` view of snippet `origin_id`.
pub fn operator_view_seed(global_seed: u64, origin_id: &str, op: OperatorTag) -> u64 {
    view_seed(global_seed, origin_id, OPERATOR_VIEW_BASE + op as u64)
}

/// One view per snippet and operator of `ops` that applies to it.
pub fn operator_views(snippets: &[Snippet], ops: &BTreeSet<OperatorTag>, global_seed: u64, pool: &NamePool) -> Result<Vec<ViewRecord>> {
    let mut out = Vec::new();
    for s in snippets {
        for op in applicable(&s.tree).intersection(ops) {
            let seed = operator_view_seed(global_seed, &s.id, *op);
            let tree = apply(*op, &s.tree, seed, pool)?;
            out.push(ViewRecord { origin_id: s.id.clone(), op: *op, seed, code: print(&tree) });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusRow {
    pub op: OperatorTag,
    pub applicable: usize,
    pub total: usize,
}

/// Number of snippets each operator of `ops` applies to.
pub fn census(snippets: &[Snippet], ops: &BTreeSet<OperatorTag>) -> Vec<CensusRow> {
    let sets: Vec<BTreeSet<OperatorTag>> = snippets.iter().map(|s| applicable(&s.tree)).collect();
    ops.iter()
        .map(|op| CensusRow { op: *op, applicable: sets.iter().filter(|set| set.contains(op)).count(), total: snippets.len() })
        .collect()
}

pub fn census_table(rows: &[CensusRow]) -> String {
    let mut out = format!("{:<4} {:>10} {:>7} {:>7}\n", "op", "applicable", "total", "share");
    for r in rows {
        let share = if r.total == 0 { 0.0 } else { 100.0 * r.applicable as f64 / r.total as f64 };
        out.push_str(&format!("{:<4} {:>10} {:>7} {:>6.1}%\n", r.op, r.applicable, r.total, share));
    }
    out
}

/// Embeddings of the original snippets.
pub fn embed_snippets(snippets: &[Snippet], params: &EncoderParams) -> Vec<EmbeddingRecord> {
    let trees: Vec<_> = snippets.iter().map(|s| &s.tree).collect();
    snippets
        .iter()
        .zip(encode_many(&trees, params))
        .map(|(s, vector)| EmbeddingRecord { id: s.id.clone(), label: s.label.clone(), vector })
        .collect()
}

/// `<id>::view1` and `<id>::view2` embeddings from the two-view sampler.
/// Snippets without an applicable operator are skipped and counted.
pub fn embed_view_pairs(
    snippets: &[Snippet],
    params: &EncoderParams,
    ops: &BTreeSet<OperatorTag>,
    global_seed: u64,
    pool: &NamePool,
) -> Result<(Vec<EmbeddingRecord>, usize)> {
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for s in snippets {
        match sample_views(&s.tree, ops, &s.id, global_seed, pool) {
            Ok(pair) => pairs.push((s, pair)),
            Err(corder_core::transform::TransformError::NoApplicableOperator) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let trees: Vec<_> = pairs.iter().flat_map(|(_, (a, b))| [&a.tree, &b.tree]).collect();
    let vectors = encode_many(&trees, params);
    let mut out = Vec::with_capacity(vectors.len());
    for ((s, _), v) in pairs.iter().zip(vectors.chunks(2)) {
        for (suffix, vector) in [(QUERY_VIEW_SUFFIX, &v[0]), (TARGET_VIEW_SUFFIX, &v[1])] {
            out.push(EmbeddingRecord { id: format!("{}{suffix}", s.id), label: s.label.clone(), vector: vector.clone() });
        }
    }
    Ok((out, skipped))
}
