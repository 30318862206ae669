//! Shared fixtures for the benchmarks in `benches/`.

use corder_core::corpus::{generate_corpus, parse_records};
use corder_core::Snippet;

/// The default 10-family corpus with `variants` programs per family.
pub fn corpus(variants: usize) -> Vec<Snippet> {
    parse_records(&generate_corpus(10, variants, 42).expect("valid counts")).expect("generated programs parse")
}
