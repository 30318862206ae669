//! Contrastive pretraining: two-view batches, the NT-Xent loss, the training
//! loop and checkpoints.
//!
//! A batch holds `2N` views; views `2k` and `2k + 1` come from snippet `k`
//! and every other view in the batch is a negative for them.

mod checkpoint;
mod loss;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, FORMAT_VERSION, MAGIC};
pub use loss::{nt_xent, partner, similarity_matrix};

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::corpus::Snippet;
use crate::encoder::{backward, forward, EncoderConfig, EncoderParams, Forest};
use crate::numerics::{adam_step, mix64, AdamConfig, OptState, Pcg32};
use crate::transform::{applicable, sample_views, NamePool, OperatorTag, TransformError, TransformedView};

pub const DEFAULT_BATCH_SIZE: usize = 32;
pub const DEFAULT_TRAIN_STEPS: usize = 2000;
pub const DEFAULT_TEMPERATURE: f64 = 1.0;

/// Domain tag mixed into per-step seeds.
const STEP_TAG: u64 = 0x5354_4550;

#[derive(Debug, thiserror::Error)]
pub enum ContrastiveError {
    #[error("vector {index} has zero norm")]
    ZeroVector { index: usize },
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("expected a nonzero even number of views, got {0}")]
    OddViewCount(usize),
    #[error("batch needs {needed} usable snippets, only {available} available")]
    InsufficientCorpus { needed: usize, available: usize },
    #[error("batch size must be at least 2")]
    BatchTooSmall,
    #[error("parameters became non-finite at step {step}")]
    NumericalDivergence { step: usize },
    #[error("checkpoint format version {found}, expected {expected}")]
    FormatVersionMismatch { found: u32, expected: u32 },
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// `2N` views in pair order.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub n: usize,
    pub views: Vec<TransformedView>,
}

/// Takes snippets from `candidates` in order, skipping those with no
/// operator from `ops`, until `n` pairs of views are built.
pub fn make_batch(
    candidates: &[&Snippet],
    n: usize,
    ops: &BTreeSet<OperatorTag>,
    global_seed: u64,
    pool: &NamePool,
) -> Result<Batch, ContrastiveError> {
    if n < 2 {
        return Err(ContrastiveError::BatchTooSmall);
    }
    let mut views = Vec::with_capacity(2 * n);
    for snippet in candidates {
        if views.len() == 2 * n {
            break;
        }
        match sample_views(&snippet.tree, ops, &snippet.id, global_seed, pool) {
            Ok((a, b)) => {
                views.push(a);
                views.push(b);
            }
            Err(TransformError::NoApplicableOperator) => {}
            Err(e) => return Err(e.into()),
        }
    }
    if views.len() < 2 * n {
        return Err(ContrastiveError::InsufficientCorpus { needed: n, available: views.len() / 2 });
    }
    Ok(Batch { n, views })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub steps: usize,
    pub ops: BTreeSet<OperatorTag>,
    pub temperature: f64,
    pub seed: u64,
    pub adam: AdamConfig,
    pub encoder: EncoderConfig,
    /// Save every this many steps when a checkpoint path is given; 0 saves only at the end.
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: DEFAULT_BATCH_SIZE,
            steps: DEFAULT_TRAIN_STEPS,
            ops: OperatorTag::all(),
            temperature: DEFAULT_TEMPERATURE,
            seed: 42,
            adam: AdamConfig::default(),
            encoder: EncoderConfig::default(),
            checkpoint_every: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    /// Batch loss before each update.
    pub losses: Vec<f64>,
}

/// The checkpoint a run starts from.
pub fn initial_checkpoint(config: &TrainConfig) -> Checkpoint {
    let params = EncoderParams::init(config.encoder, config.seed);
    let optimizer = OptState::new(config.adam, &params.tensor_lengths());
    Checkpoint {
        params,
        optimizer,
        seed: config.seed,
        step: 0,
        temperature: config.temperature,
        ops: config.ops.clone(),
    }
}

/// Contrastive pretraining; see [`train_with`].
pub fn train(corpus: &[Snippet], config: &TrainConfig, checkpoint_out: Option<&Path>) -> Result<TrainOutcome, ContrastiveError> {
    train_with(corpus, config, checkpoint_out, |_, _| {})
}

/// Runs `config.steps` updates of batch → encode → loss → backward → Adam.
/// `on_step(step, loss)` is called after each update.
pub fn train_with(
    corpus: &[Snippet],
    config: &TrainConfig,
    checkpoint_out: Option<&Path>,
    mut on_step: impl FnMut(usize, f64),
) -> Result<TrainOutcome, ContrastiveError> {
    if !(config.temperature > 0.0) {
        return Err(ContrastiveError::NonPositiveTemperature(config.temperature));
    }
    if config.batch_size < 2 {
        return Err(ContrastiveError::BatchTooSmall);
    }
    let usable: Vec<&Snippet> = corpus.iter().filter(|s| !applicable(&s.tree).is_disjoint(&config.ops)).collect();
    if config.steps > 0 && usable.len() < config.batch_size {
        return Err(ContrastiveError::InsufficientCorpus { needed: config.batch_size, available: usable.len() });
    }
    let pool = NamePool::harvest(corpus.iter().map(|s| &s.tree));
    let mut checkpoint = initial_checkpoint(config);
    let mut grads = EncoderParams::zeros(config.encoder);
    let mut losses = Vec::with_capacity(config.steps);

    for step in 0..config.steps {
        let step_seed = mix64(config.seed, step as u64, STEP_TAG);
        let mut order = usable.clone();
        Pcg32::seeded(step_seed).shuffle(&mut order);
        let batch = make_batch(&order, config.batch_size, &config.ops, step_seed, &pool)?;

        let params = &mut checkpoint.params;
        let forest = Forest::new(batch.views.iter().map(|v| &v.tree), config.encoder.vocab);
        let (pooled, cache) = forward(&forest, params);
        let (loss, d_pooled) = nt_xent(&pooled, config.temperature)?;
        if !loss.is_finite() {
            return Err(ContrastiveError::NumericalDivergence { step });
        }
        grads.fill_zero();
        backward(&forest, params, &cache, &d_pooled, &mut grads);
        adam_step(&mut params.tensors_mut(), &grads.tensors(), &mut checkpoint.optimizer)
            .map_err(|_| ContrastiveError::NumericalDivergence { step })?;
        checkpoint.step = step as u64 + 1;
        losses.push(loss);
        on_step(step, loss);

        if let Some(path) = checkpoint_out {
            if config.checkpoint_every > 0 && (step + 1) % config.checkpoint_every == 0 {
                save_checkpoint(path, &checkpoint)?;
            }
        }
    }
    if let Some(path) = checkpoint_out {
        save_checkpoint(path, &checkpoint)?;
    }
    Ok(TrainOutcome { checkpoint, losses })
}

/// `step,loss` CSV with 1-based steps.
pub fn write_loss_csv(path: &Path, losses: &[f64]) -> io::Result<()> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "step,loss")?;
    for (i, loss) in losses.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, loss)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_corpus, parse_records};
    use crate::encoder::{encode, forward as encoder_forward};
    use crate::numerics::{grad_check_at, Matrix};
    use crate::syntax::parse_source;

    fn snippet(id: &str, src: &str) -> Snippet {
        Snippet { id: id.into(), label: None, tree: parse_source(src).unwrap() }
    }

    fn small_config(steps: usize) -> TrainConfig {
        TrainConfig {
            batch_size: 4,
            steps,
            encoder: EncoderConfig { dim: 16, steps: 2, vocab: 256 },
            adam: AdamConfig { learning_rate: 1e-2, ..AdamConfig::default() },
            ..TrainConfig::default()
        }
    }

    fn corpus(variants: usize) -> Vec<Snippet> {
        parse_records(&generate_corpus(10, variants, 3).unwrap()).unwrap()
    }

    #[test]
    fn batch_layout_pairs_adjacent_views() {
        let a = snippet("a", "int f(int x){return x;}");
        let b = snippet("b", "int g(int y){return y + 1;}");
        let batch = make_batch(&[&a, &b], 2, &OperatorTag::all(), 0, &NamePool::default()).unwrap();
        assert_eq!(batch.views.len(), 4);
        let origins: Vec<&str> = batch.views.iter().map(|v| v.origin_id.as_str()).collect();
        assert_eq!(origins, ["a", "a", "b", "b"]);
        let again = make_batch(&[&a, &b], 2, &OperatorTag::all(), 0, &NamePool::default()).unwrap();
        assert_eq!(batch, again);
    }

    #[test]
    fn inapplicable_snippets_are_skipped() {
        let flat = snippet("flat", "int f(){return 1;}");
        let sw = |id: &str| snippet(id, "int f(int x){switch(x){case 1: return 2;} return 0;}");
        let (s1, s2) = (sw("s1"), sw("s2"));
        let sf: BTreeSet<_> = [OperatorTag::SF].into();
        let batch = make_batch(&[&flat, &s1, &s2], 2, &sf, 0, &NamePool::default()).unwrap();
        assert_eq!(batch.views[0].origin_id, "s1");
        assert!(matches!(
            make_batch(&[&flat, &s1], 2, &sf, 0, &NamePool::default()),
            Err(ContrastiveError::InsufficientCorpus { needed: 2, available: 1 })
        ));
    }

    #[test]
    fn zero_steps_returns_initialization() {
        let config = small_config(0);
        let out = train(&corpus(1), &config, None).unwrap();
        assert!(out.losses.is_empty());
        assert_eq!(out.checkpoint.params, EncoderParams::init(config.encoder, config.seed));
        assert_eq!(out.checkpoint.step, 0);
    }

    #[test]
    fn training_is_deterministic_and_learns() {
        let data = corpus(2);
        let config = small_config(60);
        let a = train(&data, &config, None).unwrap();
        let b = train(&data, &config, None).unwrap();
        assert_eq!(a.losses, b.losses);
        assert_eq!(a.checkpoint.params, b.checkpoint.params);
        let head: f64 = a.losses[..10].iter().sum::<f64>() / 10.0;
        let tail: f64 = a.losses[50..].iter().sum::<f64>() / 10.0;
        assert!(tail < head, "loss did not decrease: {head} -> {tail}");
    }

    #[test]
    fn corpus_too_small() {
        let config = TrainConfig { batch_size: 32, ..small_config(1) };
        assert!(matches!(train(&corpus(1), &config, None), Err(ContrastiveError::InsufficientCorpus { .. })));
    }

    #[test]
    fn composite_gradient_matches_finite_differences() {
        let data = corpus(1);
        let trees: Vec<&crate::syntax::Ast> = data.iter().take(4).map(|s| &s.tree).collect();
        let config = EncoderConfig { dim: 8, steps: 2, vocab: 64 };
        let params = EncoderParams::init(config, 17);
        let forest = Forest::new(trees.iter().copied(), config.vocab);
        let (pooled, cache) = encoder_forward(&forest, &params);
        let (_, d_pooled) = nt_xent(&pooled, 1.0).unwrap();
        let mut grads = EncoderParams::zeros(config);
        backward(&forest, &params, &cache, &d_pooled, &mut grads);
        let mut probe = params.clone();
        let loss = |theta: &[f64]| {
            probe.unflatten(theta);
            let vectors: Vec<Vec<f64>> = trees.iter().map(|t| encode(t, &probe)).collect();
            nt_xent(&Matrix::from_rows(&vectors).unwrap(), 1.0).unwrap().0
        };
        let theta = params.flatten();
        let analytic = grads.flatten();
        let indices: Vec<usize> = (0..theta.len()).collect();
        let err = grad_check_at(loss, &theta, &analytic, &indices, 1e-6);
        assert!(err < 1e-4, "{err}");
    }
}
