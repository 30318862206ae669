use std::collections::HashSet;

use super::{EmbeddingRecord, EvalError};
use crate::numerics::{dot, l2_norm};

/// Brute-force cosine index over `(id, vector)` entries of one dimension.
#[derive(Debug, Clone, Default)]
pub struct RetrievalIndex {
    dim: usize,
    ids: Vec<String>,
    vectors: Vec<Vec<f64>>,
    norms: Vec<f64>,
    seen: HashSet<String>,
}

impl RetrievalIndex {
    pub fn new(dim: usize) -> Self {
        RetrievalIndex { dim, ..Default::default() }
    }

    pub fn insert(&mut self, id: impl Into<String>, vector: Vec<f64>) -> Result<(), EvalError> {
        let id = id.into();
        if vector.len() != self.dim {
            return Err(EvalError::DimensionMismatch { expected: self.dim, found: vector.len() });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(EvalError::NonFinite(id));
        }
        if !self.seen.insert(id.clone()) {
            return Err(EvalError::DuplicateId(id));
        }
        self.norms.push(l2_norm(&vector));
        self.ids.push(id);
        self.vectors.push(vector);
        Ok(())
    }

    /// Builds an index whose dimension is that of the first record.
    pub fn from_records(records: &[EmbeddingRecord]) -> Result<Self, EvalError> {
        let dim = records.first().map_or(0, |r| r.vector.len());
        let mut index = RetrievalIndex::new(dim);
        for r in records {
            index.insert(r.id.clone(), r.vector.clone())?;
        }
        Ok(index)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }
}

/// Ranked `(id, cosine)` pairs, scores nonincreasing and ties by ascending id.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct QueryResult {
    pub hits: Vec<(String, f64)>,
}

impl QueryResult {
    pub fn ids(&self) -> Vec<String> {
        self.hits.iter().map(|(id, _)| id.clone()).collect()
    }
}

/// Exact top-`k` cosine neighbours of `query`.
pub fn knn(index: &RetrievalIndex, query: &[f64], k: usize) -> Result<QueryResult, EvalError> {
    knn_excluding(index, query, k, None)
}

/// [`knn`] with one id removed from consideration.
pub fn knn_excluding(index: &RetrievalIndex, query: &[f64], k: usize, exclude: Option<&str>) -> Result<QueryResult, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroCutoff);
    }
    if index.is_empty() {
        return Err(EvalError::EmptyIndex);
    }
    if query.len() != index.dim {
        return Err(EvalError::DimensionMismatch { expected: index.dim, found: query.len() });
    }
    let qn = l2_norm(query);
    let mut scored: Vec<(usize, f64)> = (0..index.len())
        .filter(|&i| exclude != Some(index.ids[i].as_str()))
        .map(|i| {
            let denom = qn * index.norms[i];
            let score = if denom == 0.0 { 0.0 } else { dot(query, &index.vectors[i]) / denom };
            (i, score)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| index.ids[a.0].cmp(&index.ids[b.0])));
    scored.truncate(k);
    Ok(QueryResult { hits: scored.into_iter().map(|(i, s)| (index.ids[i].clone(), s)).collect() })
}
