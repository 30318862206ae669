//! Numeric substrate: dense matrices, deterministic PRNG, Adam and
//! finite-difference gradient checking. Everything here is single-threaded
//! and bit-reproducible.

mod adam;
mod gradcheck;
mod matrix;
mod rng;

pub use adam::{adam_step, AdamConfig, OptState};
pub use gradcheck::{grad_check, grad_check_at, relative_error, REL_FLOOR};
pub use matrix::{cosine, dot, gemm, l2_norm, Matrix};
pub use rng::{fnv1a64, mix64, splitmix64, Pcg32, DEFAULT_STREAM};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NumericsError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch { op: &'static str, left: (usize, usize), right: (usize, usize) },
    #[error("cannot normalize all-zero row {row}")]
    ZeroNorm { row: usize },
    #[error("non-finite value")]
    NonFinite,
}
