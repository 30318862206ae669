//! Run configuration: command-line flags override a TOML file, which
//! overrides the built-in defaults.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use corder_core::contrastive::{DEFAULT_BATCH_SIZE, DEFAULT_TEMPERATURE, DEFAULT_TRAIN_STEPS};
use corder_core::encoder::{DEFAULT_DIM, DEFAULT_STEPS, DEFAULT_VOCAB};
use corder_core::evalkit::DEFAULT_CUTOFF;
use corder_core::numerics::AdamConfig;
use corder_core::{EncoderConfig, OperatorTag, TrainConfig};

pub const DEFAULT_SEED: u64 = 42;

/// Every field optional; shared by the TOML file and the flag set.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunOverrides {
    /// Global seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pairs per batch (N).
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Optimizer steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Comma-separated operator set, e.g. `VR,PS`.
    #[arg(long)]
    pub ops: Option<String>,
    /// Softmax temperature of the contrastive loss.
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Embedding width d.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Tree-convolution steps K.
    #[arg(long)]
    pub conv_steps: Option<usize>,
    /// Token hash buckets.
    #[arg(long)]
    pub vocab: Option<usize>,
    /// Adam learning rate.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Retrieval cutoff k.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Save an intermediate checkpoint every this many steps.
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Corpus JSONL file or directory of `.mj` files; the built-in generated
    /// corpus when absent.
    #[arg(long = "corpus")]
    pub corpus: Option<PathBuf>,
    /// Output checkpoint path.
    #[arg(long = "out")]
    pub checkpoint: Option<PathBuf>,
    /// Output loss CSV path.
    #[arg(long)]
    pub loss_csv: Option<PathBuf>,
}

impl RunOverrides {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields of `self` win over those of `fallback`.
    pub fn or(self, fallback: RunOverrides) -> RunOverrides {
        RunOverrides {
            seed: self.seed.or(fallback.seed),
            batch_size: self.batch_size.or(fallback.batch_size),
            steps: self.steps.or(fallback.steps),
            ops: self.ops.or(fallback.ops),
            temperature: self.temperature.or(fallback.temperature),
            dim: self.dim.or(fallback.dim),
            conv_steps: self.conv_steps.or(fallback.conv_steps),
            vocab: self.vocab.or(fallback.vocab),
            learning_rate: self.learning_rate.or(fallback.learning_rate),
            cutoff: self.cutoff.or(fallback.cutoff),
            checkpoint_every: self.checkpoint_every.or(fallback.checkpoint_every),
            corpus: self.corpus.or(fallback.corpus),
            checkpoint: self.checkpoint.or(fallback.checkpoint),
            loss_csv: self.loss_csv.or(fallback.loss_csv),
        }
    }
}

/// A fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub batch_size: usize,
    pub steps: usize,
    pub ops: BTreeSet<OperatorTag>,
    pub temperature: f64,
    pub dim: usize,
    pub conv_steps: usize,
    pub vocab: usize,
    pub learning_rate: f64,
    pub cutoff: usize,
    pub checkpoint_every: usize,
    pub corpus: Option<PathBuf>,
    pub checkpoint: PathBuf,
    pub loss_csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(flags: RunOverrides, file: Option<RunOverrides>) -> Result<RunConfig> {
        let o = flags.or(file.unwrap_or_default());
        let ops = match &o.ops {
            Some(text) => OperatorTag::parse_list(text)?,
            None => OperatorTag::all(),
        };
        let config = RunConfig {
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            batch_size: o.batch_size.unwrap_or(DEFAULT_BATCH_SIZE),
            steps: o.steps.unwrap_or(DEFAULT_TRAIN_STEPS),
            ops,
            temperature: o.temperature.unwrap_or(DEFAULT_TEMPERATURE),
            dim: o.dim.unwrap_or(DEFAULT_DIM),
            conv_steps: o.conv_steps.unwrap_or(DEFAULT_STEPS),
            vocab: o.vocab.unwrap_or(DEFAULT_VOCAB),
            learning_rate: o.learning_rate.unwrap_or(AdamConfig::default().learning_rate),
            cutoff: o.cutoff.unwrap_or(DEFAULT_CUTOFF),
            checkpoint_every: o.checkpoint_every.unwrap_or(0),
            corpus: o.corpus,
            checkpoint: o.checkpoint.unwrap_or_else(|| PathBuf::from("corder.ckpt")),
            loss_csv: o.loss_csv,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            bail!("batch_size must be at least 2, got {}", self.batch_size);
        }
        if self.ops.is_empty() {
            bail!("operator set is empty");
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            bail!("temperature must be positive and finite, got {}", self.temperature);
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            bail!("learning_rate must be positive and finite, got {}", self.learning_rate);
        }
        if self.dim == 0 || self.vocab == 0 {
            bail!("dim and vocab must be positive");
        }
        if self.cutoff == 0 {
            bail!("cutoff must be at least 1");
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            steps: self.steps,
            ops: self.ops.clone(),
            temperature: self.temperature,
            seed: self.seed,
            adam: AdamConfig { learning_rate: self.learning_rate, ..AdamConfig::default() },
            encoder: EncoderConfig { dim: self.dim, steps: self.conv_steps, vocab: self.vocab },
            checkpoint_every: self.checkpoint_every,
        }
    }
}
