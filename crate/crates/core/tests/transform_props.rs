//! Semantic preservation and structure laws of the rewrite operators.

use corder_core::corpus::{generate_corpus, parse_records};
use corder_core::interp::{equivalent, Verdict};
use corder_core::numerics::{mix64, Pcg32};
use corder_core::syntax::{parse_source, print, random_program, Ast, RandomProgramConfig};
use corder_core::transform::{applicable, apply, sample_views, NamePool, OperatorTag, TransformError};
use proptest::prelude::*;

fn entry(tree: &Ast) -> String {
    tree.methods().next().expect("a method").token.clone().expect("named")
}

fn check_operator(tree: &Ast, op: OperatorTag, seed: u64, pool: &NamePool) -> Result<(), TestCaseError> {
    let out = apply(op, tree, seed, pool).unwrap();
    prop_assert!(out.validate().is_ok());
    prop_assert_eq!(&parse_source(&print(&out)).unwrap(), &out);
    prop_assert_eq!(&apply(op, tree, seed, pool).unwrap(), &out, "{} is not reproducible", op);
    match op {
        OperatorTag::VR | OperatorTag::PS => prop_assert_eq!(out.kind_multiset(), tree.kind_multiset()),
        OperatorTag::US => prop_assert!(out.node_count() > tree.node_count()),
        OperatorTag::LX | OperatorTag::SF => prop_assert_ne!(out.kind_multiset(), tree.kind_multiset()),
    }
    let verdict = equivalent(tree, &out, &entry(tree), 20, mix64(seed, 1, 2)).unwrap();
    prop_assert!(!matches!(verdict, Verdict::Inequivalent(_)), "{} broke\n{}\n=>\n{}\n{:?}", op, print(tree), print(&out), verdict);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn operators_preserve_semantics_on_random_programs(seed in any::<u64>()) {
        let tree = random_program(&mut Pcg32::seeded(seed), &RandomProgramConfig::default());
        let pool = NamePool::default();
        let ops = applicable(&tree);
        for op in OperatorTag::all() {
            if ops.contains(&op) {
                check_operator(&tree, op, seed ^ op.bit() as u64, &pool)?;
            } else {
                prop_assert_eq!(apply(op, &tree, seed, &pool), Err(TransformError::NotApplicable(op)));
            }
        }
    }

    #[test]
    fn views_come_from_distinct_operators(seed in any::<u64>()) {
        let tree = random_program(&mut Pcg32::seeded(seed), &RandomProgramConfig::default());
        let usable = applicable(&tree);
        let (a, b) = sample_views(&tree, &OperatorTag::all(), "p", seed, &NamePool::default()).unwrap();
        prop_assert!(usable.contains(&a.op) && usable.contains(&b.op));
        if usable.len() > 1 {
            prop_assert_ne!(a.op, b.op);
        } else {
            prop_assert_ne!(a.seed, b.seed);
        }
    }
}

#[test]
fn random_programs_exercise_every_operator() {
    let mut rng = Pcg32::seeded(3);
    let mut seen = std::collections::BTreeSet::new();
    for _ in 0..300 {
        seen.extend(applicable(&random_program(&mut rng, &RandomProgramConfig::default())));
    }
    assert_eq!(seen, OperatorTag::all());
}

#[test]
fn operators_preserve_semantics_on_the_corpus() {
    let snippets = parse_records(&generate_corpus(10, 10, 42).unwrap()).unwrap();
    let pool = NamePool::harvest(snippets.iter().map(|s| &s.tree));
    for (i, s) in snippets.iter().enumerate() {
        for op in applicable(&s.tree) {
            check_operator(&s.tree, op, mix64(42, i as u64, op.bit() as u64), &pool).unwrap_or_else(|e| panic!("{}: {e}", s.id));
        }
    }
}
