use std::collections::BTreeMap;

use super::{node_buckets, CodeVector, EncoderError, EncoderParams};
use crate::numerics::Matrix;
use crate::syntax::Ast;

/// Per-node token signatures with multiplicities, in a canonical order so the
/// mean does not depend on node order.
fn signatures(tree: &Ast, vocab: usize) -> (BTreeMap<Vec<usize>, usize>, usize) {
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut total = 0;
    for node in tree.preorder() {
        let buckets = node_buckets(node, vocab);
        if !buckets.is_empty() {
            *counts.entry(buckets).or_default() += 1;
            total += 1;
        }
    }
    (counts, total)
}

fn mean_embedding(tree: &Ast, params: &EncoderParams) -> Result<Vec<f64>, EncoderError> {
    let d = params.config.dim;
    let (counts, total) = signatures(tree, params.config.vocab);
    if total == 0 {
        return Err(EncoderError::EmptyProgram);
    }
    let mut mean = vec![0.0; d];
    for (buckets, count) in &counts {
        let w = *count as f64 / (buckets.len() * total) as f64;
        for &b in buckets {
            mean.iter_mut().zip(params.token_emb.row(b)).for_each(|(m, e)| *m += w * e);
        }
    }
    Ok(mean)
}

fn affine_tanh(w: &Matrix, x: &[f64], bias: &[f64]) -> Vec<f64> {
    (0..w.rows()).map(|r| (crate::numerics::dot(w.row(r), x) + bias[r]).tanh()).collect()
}

/// Token-bag baseline: `tanh(W_t · mean(token embeddings) + b)`.
pub fn encode_bag(tree: &Ast, params: &EncoderParams) -> Result<CodeVector, EncoderError> {
    let mean = mean_embedding(tree, params)?;
    Ok(affine_tanh(&params.w_t, &mean, &params.bias))
}

/// Accumulates into `grads` the gradient of `d_out · encode_bag(tree)`.
pub fn encode_bag_backward(tree: &Ast, params: &EncoderParams, d_out: &[f64], grads: &mut EncoderParams) -> Result<(), EncoderError> {
    let d = params.config.dim;
    let mean = mean_embedding(tree, params)?;
    let out = affine_tanh(&params.w_t, &mean, &params.bias);
    let dz: Vec<f64> = out.iter().zip(d_out).map(|(o, g)| g * (1.0 - o * o)).collect();
    let mut dmean = vec![0.0; d];
    for r in 0..d {
        grads.bias[r] += dz[r];
        let wrow = params.w_t.row(r);
        let grow = grads.w_t.row_mut(r);
        for j in 0..d {
            grow[j] += dz[r] * mean[j];
            dmean[j] += dz[r] * wrow[j];
        }
    }
    let (counts, total) = signatures(tree, params.config.vocab);
    for (buckets, count) in &counts {
        let w = *count as f64 / (buckets.len() * total) as f64;
        for &b in buckets {
            grads.token_emb.row_mut(b).iter_mut().zip(&dmean).for_each(|(x, g)| *x += w * g);
        }
    }
    Ok(())
}
