use std::collections::BTreeSet;

use super::names::NamePool;
use super::{applicable, apply, OperatorTag, TransformError};
use crate::numerics::{fnv1a64, mix64, Pcg32};
use crate::syntax::Ast;

/// One transformed program view of a corpus snippet.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedView {
    pub origin_id: String,
    pub op: OperatorTag,
    pub seed: u64,
    pub tree: Ast,
}

/// `mix64(global_seed, fnv1a64(origin_id), view_index)`.
///
/// Views 0 and 1 seed the two operators; index 2 seeds the operator draw.
pub fn view_seed(global_seed: u64, origin_id: &str, view_index: u64) -> u64 {
    mix64(global_seed, fnv1a64(origin_id.as_bytes()), view_index)
}

/// Draws two operators from `ops ∩ applicable(tree)`, distinct when at
/// least two are available, and applies each with its own view seed.
pub fn sample_views(
    tree: &Ast,
    ops: &BTreeSet<OperatorTag>,
    origin_id: &str,
    global_seed: u64,
    pool: &NamePool,
) -> Result<(TransformedView, TransformedView), TransformError> {
    let usable: Vec<OperatorTag> = applicable(tree).intersection(ops).copied().collect();
    if usable.is_empty() {
        return Err(TransformError::NoApplicableOperator);
    }
    let mut draw = Pcg32::seeded(view_seed(global_seed, origin_id, 2));
    let (op0, op1) = if usable.len() == 1 {
        (usable[0], usable[0])
    } else {
        let i = draw.index(usable.len());
        let mut j = draw.index(usable.len() - 1);
        if j >= i {
            j += 1;
        }
        (usable[i], usable[j])
    };
    let seed0 = view_seed(global_seed, origin_id, 0);
    let mut seed1 = view_seed(global_seed, origin_id, 1);
    if seed1 == seed0 {
        seed1 = seed1.wrapping_add(1);
    }
    let view = |op: OperatorTag, seed: u64| -> Result<TransformedView, TransformError> {
        Ok(TransformedView { origin_id: origin_id.to_string(), op, seed, tree: apply(op, tree, seed, pool)? })
    };
    Ok((view(op0, seed0)?, view(op1, seed1)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_source;

    #[test]
    fn distinct_operators_when_possible() {
        let tree = parse_source("int f(int a, int b){a = 1; b = 2; return a + b;}").unwrap();
        for seed in 0..30 {
            let (v0, v1) = sample_views(&tree, &OperatorTag::all(), "s", seed, &NamePool::default()).unwrap();
            assert_ne!(v0.op, v1.op);
            assert_ne!(v0.seed, v1.seed);
        }
    }

    #[test]
    fn single_operator_uses_two_seeds() {
        let tree = parse_source("int f(){return 1;}").unwrap();
        let (v0, v1) = sample_views(&tree, &OperatorTag::all(), "s", 4, &NamePool::default()).unwrap();
        assert_eq!((v0.op, v1.op), (OperatorTag::US, OperatorTag::US));
        assert_ne!(v0.seed, v1.seed);
    }

    #[test]
    fn ablation_restricts_operators() {
        let ps: BTreeSet<_> = [OperatorTag::PS].into();
        let tree = parse_source("int f(int a, int b){a = 1; b = 2; return a + b;}").unwrap();
        let (v0, v1) = sample_views(&tree, &ps, "s", 1, &NamePool::default()).unwrap();
        assert_eq!((v0.op, v1.op), (OperatorTag::PS, OperatorTag::PS));
        let flat = parse_source("int f(){return 1;}").unwrap();
        assert_eq!(sample_views(&flat, &ps, "s", 1, &NamePool::default()), Err(TransformError::NoApplicableOperator));
    }

    #[test]
    fn seeds_follow_documented_derivation() {
        assert_eq!(view_seed(7, "abc", 1), mix64(7, fnv1a64(b"abc"), 1));
        let tree = parse_source("int f(int a){return a;}").unwrap();
        let run = || sample_views(&tree, &OperatorTag::all(), "abc", 7, &NamePool::default()).unwrap();
        assert_eq!(run(), run());
    }
}
