//! `corder`: corpus generation, transformation, verification, contrastive
//! pretraining, embedding and evaluation.
//!
//! Machine-readable output (JSON, JSONL, CSV) goes to stdout or `--out`;
//! progress and summaries go to stderr. Exit status is 0 on success, 1 when
//! `verify` finds an inequivalent view and 2 on any other failure.

mod commands;
mod config;
mod views;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::RunOverrides;

#[derive(Debug, Parser)]
#[command(name = "corder", version, about = "Contrastive pretraining of tree encoders on program rewrites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    /// Label-mate mean average precision.
    Map,
    /// View-pair mean reciprocal rank.
    Mrr,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labelled corpus from the built-in program families.
    GenCorpus {
        #[arg(long, default_value_t = 10)]
        families: usize,
        #[arg(long, default_value_t = 50)]
        variants_per_family: usize,
        #[arg(long, default_value_t = config::DEFAULT_SEED)]
        seed: u64,
        /// Output JSONL; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one view per snippet and applicable operator; prints the census as JSON.
    Transform {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "VR,US,PS,LX,SF")]
        ops: String,
        #[arg(long, default_value_t = config::DEFAULT_SEED)]
        seed: u64,
        /// Output view JSONL.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check views against their originals with the differential interpreter.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// View JSONL from `transform`; views are generated when absent.
        #[arg(long)]
        views: Option<PathBuf>,
        #[arg(long, default_value = "VR,US,PS,LX,SF")]
        ops: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = config::DEFAULT_SEED)]
        seed: u64,
    },
    /// Contrastive pretraining; writes a checkpoint and optionally a loss CSV.
    Pretrain {
        /// TOML file with any of the flag names below as keys.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: RunOverrides,
    },
    /// Embed every snippet of a corpus, or two views of every snippet with `--views`.
    Embed {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        /// Output JSONL; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit `<id>::view1` and `<id>::view2` records instead of the originals.
        #[arg(long)]
        views: bool,
        #[arg(long, default_value = "VR,US,PS,LX,SF")]
        ops: String,
        #[arg(long, default_value_t = config::DEFAULT_SEED)]
        seed: u64,
    },
    /// Exact k-nearest-neighbour search.
    Search {
        /// Embeddings forming the index.
        #[arg(long)]
        index: PathBuf,
        /// Query embeddings, or a corpus when `--checkpoint` is given.
        #[arg(long)]
        query_file: PathBuf,
        /// Embed the query corpus with this checkpoint.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = corder_core::evalkit::DEFAULT_CUTOFF)]
        k: usize,
    },
    /// Retrieval metric with per-query breakdown.
    EvalRetrieval {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long, value_enum)]
        protocol: Protocol,
        #[arg(long, default_value_t = corder_core::evalkit::DEFAULT_CUTOFF)]
        k: usize,
    },
    /// Logistic-regression probe on frozen embeddings.
    EvalProbe {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        /// Standardize features with training-set statistics.
        #[arg(long)]
        standardize: bool,
    },
    /// Single-operator pretraining for every operator; prints a CSV table.
    Ablate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: RunOverrides,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenCorpus { families, variants_per_family, seed, out } => {
            commands::gen_corpus(families, variants_per_family, seed, out.as_deref())
        }
        Command::Transform { input, ops, seed, out } => commands::transform(&input, &ops, seed, &out),
        Command::Verify { input, views, ops, trials, seed } => {
            match commands::verify(&input, views.as_deref(), &ops, trials, seed) {
                Ok(true) => Ok(()),
                Ok(false) => return ExitCode::from(1),
                Err(e) => Err(e),
            }
        }
        Command::Pretrain { config, overrides } => commands::pretrain(config.as_deref(), overrides),
        Command::Embed { checkpoint, input, out, views, ops, seed } => {
            commands::embed(&checkpoint, &input, out.as_deref(), views, &ops, seed)
        }
        Command::Search { index, query_file, checkpoint, k } => commands::search(&index, &query_file, checkpoint.as_deref(), k),
        Command::EvalRetrieval { embeddings, protocol, k } => commands::eval_retrieval(&embeddings, protocol, k),
        Command::EvalProbe { train, test, epochs, lr, standardize } => commands::eval_probe(&train, &test, epochs, lr, standardize),
        Command::Ablate { config, overrides } => commands::ablate(config.as_deref(), overrides),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
