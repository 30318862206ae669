use super::{node_buckets, EncoderParams};
use crate::numerics::{gemm, Matrix};
use crate::syntax::Ast;

const NO_PARENT: usize = usize::MAX;

/// `(η_l, η_r)` for child `i` (0-based) of a node with `n` children.
pub fn child_coefficients(i: usize, n: usize) -> (f64, f64) {
    if n == 1 {
        (0.5, 0.5)
    } else {
        let right = i as f64 / (n - 1) as f64;
        (1.0 - right, right)
    }
}

/// Flattened node table for a batch of trees, nodes of each tree contiguous
/// in preorder.
#[derive(Debug, Clone)]
pub struct Forest {
    kinds: Vec<usize>,
    token_offsets: Vec<usize>,
    token_buckets: Vec<usize>,
    parent: Vec<usize>,
    eta_l: Vec<f64>,
    eta_r: Vec<f64>,
    /// Nodes with at least one child.
    internal: Vec<usize>,
    /// Position of each node in `internal`, `NO_PARENT` for leaves.
    slot: Vec<usize>,
    ranges: Vec<(usize, usize)>,
}

impl Forest {
    pub fn new<'a>(trees: impl IntoIterator<Item = &'a Ast>, vocab: usize) -> Self {
        let mut forest = Forest {
            kinds: Vec::new(),
            token_offsets: vec![0],
            token_buckets: Vec::new(),
            parent: Vec::new(),
            eta_l: Vec::new(),
            eta_r: Vec::new(),
            internal: Vec::new(),
            slot: Vec::new(),
            ranges: Vec::new(),
        };
        for tree in trees {
            let start = forest.kinds.len();
            forest.visit(tree, NO_PARENT, (0.0, 0.0), vocab);
            forest.ranges.push((start, forest.kinds.len()));
        }
        forest
    }

    fn visit(&mut self, node: &Ast, parent: usize, eta: (f64, f64), vocab: usize) {
        let index = self.kinds.len();
        self.kinds.push(node.kind.index());
        self.token_buckets.extend(node_buckets(node, vocab));
        self.token_offsets.push(self.token_buckets.len());
        self.parent.push(parent);
        self.eta_l.push(eta.0);
        self.eta_r.push(eta.1);
        let n = node.children.len();
        if n == 0 {
            self.slot.push(NO_PARENT);
        } else {
            self.slot.push(self.internal.len());
            self.internal.push(index);
        }
        for (i, child) in node.children.iter().enumerate() {
            self.visit(child, index, child_coefficients(i, n), vocab);
        }
    }

    pub fn tree_count(&self) -> usize {
        self.ranges.len()
    }

    pub fn node_count(&self) -> usize {
        self.kinds.len()
    }

    fn buckets(&self, v: usize) -> &[usize] {
        &self.token_buckets[self.token_offsets[v]..self.token_offsets[v + 1]]
    }

    pub(crate) fn initial_features(&self, params: &EncoderParams) -> Matrix {
        let d = params.config.dim;
        let mut h = Matrix::zeros(self.node_count(), d);
        for v in 0..self.node_count() {
            let row = h.row_mut(v);
            row.copy_from_slice(params.type_emb.row(self.kinds[v]));
            let buckets = self.buckets(v);
            if !buckets.is_empty() {
                let w = 1.0 / buckets.len() as f64;
                for &b in buckets {
                    row.iter_mut().zip(params.token_emb.row(b)).for_each(|(x, e)| *x += w * e);
                }
            }
        }
        h
    }

    /// `[Σ η_l h(c) | Σ η_r h(c)]` for every internal node.
    fn child_sums(&self, h: &Matrix) -> Matrix {
        let d = h.cols();
        let mut a = Matrix::zeros(self.internal.len(), 2 * d);
        for v in 0..self.node_count() {
            let p = self.parent[v];
            if p == NO_PARENT {
                continue;
            }
            let (el, er) = (self.eta_l[v], self.eta_r[v]);
            let (child, row) = (h.row(v), a.row_mut(self.slot[p]));
            for j in 0..d {
                row[j] += el * child[j];
                row[d + j] += er * child[j];
            }
        }
        a
    }

    /// `tanh(W_t h(v) + [W_l | W_r] · child_sums(v) + b)` for every node.
    pub(crate) fn conv_step(&self, h: &Matrix, w_t: &Matrix, w_lr: &Matrix, bias: &[f64]) -> Matrix {
        let mut z = Matrix::zeros(self.node_count(), h.cols());
        gemm(h, false, w_t, true, 0.0, &mut z);
        let mut y = Matrix::zeros(self.internal.len(), h.cols());
        gemm(&self.child_sums(h), false, w_lr, true, 0.0, &mut y);
        for (i, &v) in self.internal.iter().enumerate() {
            z.row_mut(v).iter_mut().zip(y.row(i)).for_each(|(x, c)| *x += c);
        }
        for r in 0..z.rows() {
            z.row_mut(r).iter_mut().zip(bias).for_each(|(x, b)| *x = (*x + b).tanh());
        }
        z
    }
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Node features before the first step and after each of the `K` steps.
    pub hidden: Vec<Matrix>,
    /// Winning node per (tree, dimension), first index on ties.
    pub argmax: Vec<usize>,
}

/// Encodes every tree of the forest; row `t` of the result is tree `t`'s vector.
pub fn forward(forest: &Forest, params: &EncoderParams) -> (Matrix, ForwardCache) {
    let d = params.config.dim;
    let w_lr = params.child_matrix();
    let mut hidden = vec![forest.initial_features(params)];
    for _ in 0..params.config.steps {
        let next = forest.conv_step(hidden.last().expect("nonempty"), &params.w_t, &w_lr, &params.bias);
        hidden.push(next);
    }
    let last = hidden.last().expect("nonempty");
    let mut pooled = Matrix::zeros(forest.tree_count(), d);
    let mut argmax = vec![0; forest.tree_count() * d];
    for (t, &(start, end)) in forest.ranges.iter().enumerate() {
        for j in 0..d {
            let mut best = start;
            for v in start + 1..end {
                if last.get(v, j) > last.get(best, j) {
                    best = v;
                }
            }
            argmax[t * d + j] = best;
            pooled.set(t, j, last.get(best, j));
        }
    }
    (pooled, ForwardCache { hidden, argmax })
}

/// Accumulates into `grads` the gradient of `Σ d_pooled ⊙ pooled`.
pub fn backward(forest: &Forest, params: &EncoderParams, cache: &ForwardCache, d_pooled: &Matrix, grads: &mut EncoderParams) {
    let d = params.config.dim;
    let n = forest.node_count();
    assert_eq!(d_pooled.shape(), (forest.tree_count(), d), "upstream gradient shape");
    let mut dh = Matrix::zeros(n, d);
    for t in 0..forest.tree_count() {
        for j in 0..d {
            let v = cache.argmax[t * d + j];
            dh.set(v, j, dh.get(v, j) + d_pooled.get(t, j));
        }
    }
    let w_lr = params.child_matrix();
    let m = forest.internal.len();
    let mut dw_lr = Matrix::zeros(d, 2 * d);
    for k in (0..params.config.steps).rev() {
        let out = &cache.hidden[k + 1];
        let mut dz = dh;
        for (g, h) in dz.as_mut_slice().iter_mut().zip(out.as_slice()) {
            *g *= 1.0 - h * h;
        }
        for r in 0..n {
            grads.bias.iter_mut().zip(dz.row(r)).for_each(|(b, g)| *b += g);
        }
        gemm(&dz, true, &cache.hidden[k], false, 1.0, &mut grads.w_t);
        let mut dz_int = Matrix::zeros(m, d);
        for (i, &v) in forest.internal.iter().enumerate() {
            dz_int.row_mut(i).copy_from_slice(dz.row(v));
        }
        gemm(&dz_int, true, &forest.child_sums(&cache.hidden[k]), false, 1.0, &mut dw_lr);
        dh = Matrix::zeros(n, d);
        gemm(&dz, false, &params.w_t, false, 0.0, &mut dh);
        let mut dc = Matrix::zeros(m, 2 * d);
        gemm(&dz_int, false, &w_lr, false, 0.0, &mut dc);
        for v in 0..n {
            let p = forest.parent[v];
            if p != NO_PARENT {
                let (el, er) = (forest.eta_l[v], forest.eta_r[v]);
                let parent_row = dc.row(forest.slot[p]);
                let (left, right) = (&parent_row[..d], &parent_row[d..]);
                let row = dh.row_mut(v);
                for j in 0..d {
                    row[j] += el * left[j] + er * right[j];
                }
            }
        }
    }
    grads.add_child_matrix(&dw_lr);
    for v in 0..n {
        let g = dh.row(v);
        grads.type_emb.row_mut(forest.kinds[v]).iter_mut().zip(g).for_each(|(x, y)| *x += y);
        let buckets = forest.buckets(v);
        if !buckets.is_empty() {
            let w = 1.0 / buckets.len() as f64;
            for &b in buckets {
                grads.token_emb.row_mut(b).iter_mut().zip(g).for_each(|(x, y)| *x += w * y);
            }
        }
    }
}
