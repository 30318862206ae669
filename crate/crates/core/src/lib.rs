//! Contrastive pretraining of tree encoders on semantic-preserving program
//! transformations.
//!
//! The crate is organised bottom-up:
//!
//! * [`syntax`] – the MJ mini-language (lexer, parser, printer).
//! * [`interp`] – a reference interpreter and a differential equivalence oracle.
//! * [`analysis`] – def-use sets, block enumeration and swappable statements.
//! * [`transform`] – the five rewrite operators and the two-view sampler.
//! * [`numerics`] – matrices, PCG32, Adam and finite-difference checking.
//! * [`encoder`] – the tree-convolutional encoder and a token-bag baseline.
//! * [`contrastive`] – NT-Xent loss, batching, training and checkpoints.
//! * [`evalkit`] – retrieval index, ranking metrics and the logistic probe.
//! * [`corpus`] – corpus records and the synthetic program generator.

pub mod analysis;
pub mod contrastive;
pub mod corpus;
pub mod encoder;
pub mod evalkit;
pub mod interp;
pub mod numerics;
pub mod syntax;
pub mod transform;

pub use syntax::{parse_source, print, Ast, NodeKind};
pub use contrastive::{Checkpoint, TrainConfig};
pub use corpus::{CorpusRecord, Snippet};
pub use encoder::{CodeVector, EncoderConfig, EncoderParams};
pub use transform::{OperatorTag, TransformedView};

