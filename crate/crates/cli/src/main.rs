//! `augsc` command-line harness. Exit codes: 0 success, 1 usage error,
//! 2 data error, 3 numerical failure. Failures print one JSON line on stderr.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] augsc::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) | CliError::Io(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self.code() {
            1 => "usage",
            3 => "numerical",
            _ => "data",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "augsc", version, about = "Subspace clustering experiments with data augmentation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.directory`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed (overrides `clustering.seed`).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverFlags {
    /// `l1`, `fro` or `nuc`.
    #[arg(long)]
    pub regularizer: Option<String>,
    /// Nearest dictionary columns per sample.
    #[arg(long)]
    pub knn: Option<usize>,
    #[arg(long)]
    pub mu: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a three-subspace instance.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Angle between the first two subspaces, in degrees.
        #[arg(long)]
        theta: Option<f64>,
        /// Samples per subspace.
        #[arg(long)]
        n_per: Option<usize>,
    },
    /// Write the augmented dictionary of the configured dataset.
    Augment {
        #[command(flatten)]
        common: Common,
    },
    /// Unsupervised clustering followed by spectral clustering.
    Cluster {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Semi-supervised clustering with label propagation.
    Semi {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverFlags,
        /// Reveal this many ground-truth labels per cluster.
        #[arg(long)]
        labels_per_cluster: Option<usize>,
        /// Label file with -1 for unlabeled samples.
        #[arg(long)]
        given: Option<PathBuf>,
    },
    /// Per-sample incoherence and inradius table.
    Diag {
        #[command(flatten)]
        common: Common,
    },
    /// Error rate and NMI between two label files.
    Eval {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Write `metrics.csv` here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid over angle, labeled share and augmentation size on synthetic data.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Cells solved concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Seeds per cell.
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        thetas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        label_percents: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        augments: Option<Vec<usize>>,
    },
}

fn fail(err: &CliError) -> ExitCode {
    let line = serde_json::json!({ "error": err.kind(), "code": err.code(), "message": err.to_string() });
    eprintln!("{line}");
    ExitCode::from(err.code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return fail(&CliError::Usage(e.kind().to_string()));
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
