mod commands;
mod io;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use amr_incoherence::dataset::Mode;
use amr_incoherence::proxy::{Hyper, DEFAULT_BITS};
use amr_incoherence::stats::Benchmark;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "amr-incoherence", version, about = "Incoherent dialogue generation by AMR manipulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that every line of a corpus parses and holds valid graphs
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Write one manipulated copy of every conversation
    Manipulate(ManipulateArgs),
    /// Write each positive followed by a negative made from it
    GenDataset(ManipulateArgs),
    /// Fit the proxy classifier on a labelled corpus
    TrainProxy {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        hyper: HyperArgs,
    },
    /// Score conversations with a trained model, one `id<TAB>score` per line
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Spearman correlation between model and human scores, per aspect
    EvalCorr {
        #[arg(long)]
        scores: PathBuf,
        /// Check human scores against this benchmark's ranges (fed, dstc9)
        #[arg(long)]
        benchmark: Option<Benchmark>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Accuracy of a model trained on each training set against each test set
    CrossMatrix {
        /// Training set as NAME=FILE, repeatable
        #[arg(long = "train", required = true, value_parser = named_path)]
        train: Vec<(String, PathBuf)>,
        /// Test set as NAME=FILE, repeatable
        #[arg(long = "test", required = true, value_parser = named_path)]
        test: Vec<(String, PathBuf)>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        hyper: HyperArgs,
    },
    /// Size and average lengths of one or more corpora
    Stats {
        #[arg(long = "in", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ManipulateArgs {
    #[arg(long, default_value = "deam")]
    mode: Mode,
    /// TOML configuration; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Antonym lexicon TSV replacing the bundled one
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

#[derive(Args)]
struct HyperArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = Hyper::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = Hyper::default().learning_rate)]
    lr: f64,
    #[arg(long, default_value_t = Hyper::default().l2)]
    l2: f64,
    /// Feature buckets are 2^bits
    #[arg(long, default_value_t = DEFAULT_BITS)]
    bits: u32,
}

impl HyperArgs {
    fn hyper(&self) -> Result<Hyper, Failure> {
        if !(self.lr > 0.0 && self.lr.is_finite()) || !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Failure::usage("--lr must be positive and --l2 non-negative"));
        }
        if !(1..=30).contains(&self.bits) {
            return Err(Failure::usage("--bits must be in 1..=30"));
        }
        Ok(Hyper { bits: self.bits, epochs: self.epochs, learning_rate: self.lr, l2: self.l2, seed: self.seed })
    }
}

fn named_path(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected NAME=FILE, got `{s}`")),
    }
}

/// A failed run: usage errors exit with 2, bad data with 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure::Usage(message.into())
    }

    pub fn data(message: impl Into<String>) -> Self {
        Failure::Data(message.into())
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Data(m) => f.write_str(m),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { input } => commands::validate(&input),
        Command::Manipulate(args) => commands::manipulate(&args, false),
        Command::GenDataset(args) => commands::manipulate(&args, true),
        Command::TrainProxy { input, out, hyper } => commands::train_proxy(&input, &out, &hyper.hyper()?),
        Command::Score { model, input, out, jobs } => commands::score(&model, &input, out.as_deref(), jobs),
        Command::EvalCorr { scores, benchmark, out } => commands::eval_corr(&scores, benchmark, out.as_deref()),
        Command::CrossMatrix { train, test, out, hyper } => {
            commands::cross_matrix(&train, &test, out.as_deref(), &hyper.hyper()?)
        }
        Command::Stats { inputs, out } => commands::stats(&inputs, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
