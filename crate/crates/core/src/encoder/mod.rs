//! Tree-convolutional program encoder and a token-bag baseline.
//!
//! Node features start as `typeEmb[kind] + mean(tokenEmb[subtoken buckets])`.
//! One convolution layer with matrices `W_t`, `W_l`, `W_r` and bias `b` is
//! applied `K` times with shared weights:
//!
//! ```text
//! h'(v) = tanh(W_t h(v) + Σ_i (η_l,i W_l + η_r,i W_r) h(c_i) + b)
//! ```
//!
//! and the code vector is the element-wise max over all node rows. Batches
//! of trees are encoded as one [`Forest`] so each step is a single GEMM.

mod bag;
mod forest;

pub use bag::{encode_bag, encode_bag_backward};
pub use forest::{backward, child_coefficients, forward, Forest, ForwardCache};

use crate::numerics::{fnv1a64, Matrix, Pcg32};
use crate::syntax::{Ast, NodeKind};

pub type CodeVector = Vec<f64>;

pub const DEFAULT_DIM: usize = 128;
pub const DEFAULT_STEPS: usize = 8;
pub const DEFAULT_VOCAB: usize = 4096;
/// Half-width of the uniform initialization interval.
pub const INIT_SCALE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncoderError {
    #[error("feature matrix is {found:?}, expected {expected:?}")]
    ShapeMismatch { expected: (usize, usize), found: (usize, usize) },
    #[error("program has no tokens")]
    EmptyProgram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderConfig {
    pub dim: usize,
    pub steps: usize,
    pub vocab: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig { dim: DEFAULT_DIM, steps: DEFAULT_STEPS, vocab: DEFAULT_VOCAB }
    }
}

/// Encoder weights. The same struct doubles as a gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub config: EncoderConfig,
    pub type_emb: Matrix,
    pub token_emb: Matrix,
    pub w_t: Matrix,
    pub w_l: Matrix,
    pub w_r: Matrix,
    pub bias: Vec<f64>,
}

impl EncoderParams {
    pub fn zeros(config: EncoderConfig) -> Self {
        let d = config.dim;
        EncoderParams {
            config,
            type_emb: Matrix::zeros(NodeKind::COUNT, d),
            token_emb: Matrix::zeros(config.vocab, d),
            w_t: Matrix::zeros(d, d),
            w_l: Matrix::zeros(d, d),
            w_r: Matrix::zeros(d, d),
            bias: vec![0.0; d],
        }
    }

    /// Embeddings and conv matrices uniform in ±0.05 from `Pcg32::seeded(seed)`
    /// in tensor order; bias zero.
    pub fn init(config: EncoderConfig, seed: u64) -> Self {
        let mut params = EncoderParams::zeros(config);
        let mut rng = Pcg32::seeded(seed);
        for tensor in params.tensors_mut().into_iter().take(5) {
            tensor.iter_mut().for_each(|x| *x = rng.uniform(-INIT_SCALE, INIT_SCALE));
        }
        params
    }

    /// Tensors in serialization order: type_emb, token_emb, w_t, w_l, w_r, bias.
    pub fn tensors(&self) -> [&[f64]; 6] {
        [
            self.type_emb.as_slice(),
            self.token_emb.as_slice(),
            self.w_t.as_slice(),
            self.w_l.as_slice(),
            self.w_r.as_slice(),
            &self.bias,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.type_emb.as_mut_slice(),
            self.token_emb.as_mut_slice(),
            self.w_t.as_mut_slice(),
            self.w_l.as_mut_slice(),
            self.w_r.as_mut_slice(),
            &mut self.bias,
        ]
    }

    pub fn tensor_lengths(&self) -> Vec<usize> {
        self.tensors().iter().map(|t| t.len()).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.tensor_lengths().iter().sum()
    }

    /// All parameters concatenated in tensor order.
    pub fn flatten(&self) -> Vec<f64> {
        self.tensors().concat()
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn unflatten(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.parameter_count(), "flat parameter length");
        let mut offset = 0;
        for tensor in self.tensors_mut() {
            tensor.copy_from_slice(&flat[offset..offset + tensor.len()]);
            offset += tensor.len();
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }

    pub fn fill_zero(&mut self) {
        for tensor in self.tensors_mut() {
            tensor.fill(0.0);
        }
    }

    /// `[W_l | W_r]`, a `d × 2d` matrix.
    pub(crate) fn child_matrix(&self) -> Matrix {
        let d = self.config.dim;
        let mut out = Matrix::zeros(d, 2 * d);
        for r in 0..d {
            let row = out.row_mut(r);
            row[..d].copy_from_slice(self.w_l.row(r));
            row[d..].copy_from_slice(self.w_r.row(r));
        }
        out
    }

    /// Adds a `d × 2d` gradient back onto `W_l` and `W_r`.
    pub(crate) fn add_child_matrix(&mut self, grad: &Matrix) {
        let d = self.config.dim;
        for r in 0..d {
            let row = grad.row(r);
            for (dst, src) in [(&mut self.w_l, &row[..d]), (&mut self.w_r, &row[d..])] {
                dst.row_mut(r).iter_mut().zip(src).for_each(|(a, b)| *a += b);
            }
        }
    }
}

/// Splits an identifier on underscores and lower-to-upper case boundaries,
/// lowercasing each piece. Tokens with no alphanumeric piece map to themselves.
pub fn subtokens(token: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut prev: Option<char> = None;
    for ch in token.chars() {
        if ch == '_' {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
        } else {
            if ch.is_ascii_uppercase() && prev.is_some_and(|p| p.is_ascii_lowercase() || p.is_ascii_digit()) && !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
            current.push(ch.to_ascii_lowercase());
        }
        prev = Some(ch);
    }
    if !current.is_empty() {
        out.push(current);
    }
    if out.is_empty() {
        out.push(token.to_string());
    }
    out
}

/// Hashed vocabulary bucket of one subtoken.
pub fn token_bucket(subtoken: &str, vocab: usize) -> usize {
    (fnv1a64(subtoken.as_bytes()) % vocab as u64) as usize
}

/// Buckets of every subtoken of the node's token; empty for token-less nodes.
pub(crate) fn node_buckets(node: &Ast, vocab: usize) -> Vec<usize> {
    match &node.token {
        Some(t) => subtokens(t).iter().map(|s| token_bucket(s, vocab)).collect(),
        None => Vec::new(),
    }
}

/// Initial feature row of every node, in preorder.
pub fn init_nodes(tree: &Ast, params: &EncoderParams) -> Matrix {
    let forest = Forest::new([tree], params.config.vocab);
    forest.initial_features(params)
}

/// One shared-weight convolution step over `features` (one row per preorder node).
pub fn tree_conv_step(tree: &Ast, features: &Matrix, params: &EncoderParams) -> Result<Matrix, EncoderError> {
    let forest = Forest::new([tree], params.config.vocab);
    let expected = (forest.node_count(), params.config.dim);
    if features.shape() != expected {
        return Err(EncoderError::ShapeMismatch { expected, found: features.shape() });
    }
    Ok(forest.conv_step(features, &params.w_t, &params.child_matrix(), &params.bias))
}

/// Initial features, `K` convolution steps, then max-pooling.
pub fn encode(tree: &Ast, params: &EncoderParams) -> CodeVector {
    encode_many(&[tree], params).pop().expect("one tree")
}

/// Trees encoded per forest by [`encode_many`], bounding the activation cache.
pub const ENCODE_CHUNK: usize = 64;

/// Encodes trees in forests of up to [`ENCODE_CHUNK`] trees.
pub fn encode_many(trees: &[&Ast], params: &EncoderParams) -> Vec<CodeVector> {
    let mut out = Vec::with_capacity(trees.len());
    for chunk in trees.chunks(ENCODE_CHUNK) {
        let forest = Forest::new(chunk.iter().copied(), params.config.vocab);
        let (pooled, _) = forward(&forest, params);
        out.extend((0..pooled.rows()).map(|r| pooled.row(r).to_vec()));
    }
    out
}
