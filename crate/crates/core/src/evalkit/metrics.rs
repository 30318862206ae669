use std::collections::BTreeSet;

use super::EvalError;

/// `1 / rank` of `relevant` within `ranked`, or 0 when absent.
pub fn reciprocal_rank(ranked: &[String], relevant: &str) -> f64 {
    ranked.iter().position(|id| id == relevant).map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

/// Sum of precision@i over relevant hits in the first `cutoff` positions,
/// divided by `min(|relevant|, cutoff)`.
pub fn average_precision(ranked: &[String], relevant: &BTreeSet<String>, cutoff: usize) -> f64 {
    let denom = relevant.len().min(cutoff);
    if denom == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut total = 0.0;
    for (i, id) in ranked.iter().take(cutoff).enumerate() {
        if relevant.contains(id) {
            hits += 1;
            total += hits as f64 / (i + 1) as f64;
        }
    }
    total / denom as f64
}

fn check_lengths(left: usize, right: usize) -> Result<(), EvalError> {
    if left == 0 {
        return Err(EvalError::EmptyQuerySet);
    }
    if left != right {
        return Err(EvalError::LengthMismatch { left, right });
    }
    Ok(())
}

/// Mean reciprocal rank with one relevant id per query.
pub fn mrr(results: &[Vec<String>], relevant: &[String]) -> Result<f64, EvalError> {
    check_lengths(results.len(), relevant.len())?;
    let total: f64 = results.iter().zip(relevant).map(|(r, rel)| reciprocal_rank(r, rel)).sum();
    Ok(total / results.len() as f64)
}

/// Mean average precision at `cutoff`.
pub fn map(results: &[Vec<String>], relevant: &[BTreeSet<String>], cutoff: usize) -> Result<f64, EvalError> {
    check_lengths(results.len(), relevant.len())?;
    if cutoff == 0 {
        return Err(EvalError::ZeroCutoff);
    }
    let total: f64 = results.iter().zip(relevant).map(|(r, rel)| average_precision(r, rel, cutoff)).sum();
    Ok(total / results.len() as f64)
}

/// Mean of `|relevant ∩ top-k| / k`; a short result list still divides by `k`.
pub fn precision_at_k(results: &[Vec<String>], relevant: &[BTreeSet<String>], k: usize) -> Result<f64, EvalError> {
    check_lengths(results.len(), relevant.len())?;
    if k == 0 {
        return Err(EvalError::ZeroCutoff);
    }
    let total: f64 = results
        .iter()
        .zip(relevant)
        .map(|(r, rel)| r.iter().take(k).filter(|id| rel.contains(*id)).count() as f64 / k as f64)
        .sum();
    Ok(total / results.len() as f64)
}
