//! `nbrobust` command-line tool: synthetic data, fitting, scoring and the
//! accuracy-acceptance experiment grid.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nbrobust::Error;

use crate::config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {message}", path = .path.display())]
    Input { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) => match e {
                Error::Io { .. } => 3,
                Error::Parse { .. } => 4,
                Error::InvalidParameter(_) => 6,
                Error::InvalidDomain(_) | Error::ShapeMismatch(_) => 7,
                Error::InvalidDistribution(_) | Error::DegenerateWeights(_) => 8,
                Error::OutOfDomain(_) => 9,
                Error::ZeroMarginal(_) => 10,
                Error::EmptyDataset | Error::EmptyClass(_) => 11,
                Error::NoConvergence { .. } => 12,
                Error::EmptyCandidates | Error::TooManyVertices { .. } => 13,
                Error::UnknownMetric(_) | Error::MissingMetric { .. } => 14,
            },
            CliError::Config(_) => 5,
            CliError::Input { .. } => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nbrobust", version, about = "Robustness and uncertainty metrics for Naive Bayes classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options accepted by every subcommand.
#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML file with run settings; flags override its values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master random seed
    #[arg(long)]
    seed: Option<u64>,

    /// Number of classes
    #[arg(long)]
    classes: Option<usize>,

    /// Feature cardinalities, comma separated
    #[arg(long, value_delimiter = ',')]
    cards: Option<Vec<usize>>,

    /// Number of ensemble members
    #[arg(long)]
    m_ensemble: Option<usize>,

    /// Candidate smoothing values, comma separated
    #[arg(long, value_delimiter = ',')]
    alpha_grid: Option<Vec<f64>>,

    /// Cross-validation folds
    #[arg(long)]
    folds: Option<usize>,

    /// Bisection tolerance of the local robustness metric
    #[arg(long)]
    tol: Option<f64>,
}

impl CommonArgs {
    fn resolve(&self, extra: RunConfig) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            master_seed: self.seed,
            classes: self.classes,
            feature_cards: self.cards.clone(),
            m_ensemble: self.m_ensemble,
            alpha_grid: self.alpha_grid.clone(),
            folds: self.folds,
            bisection_tol: self.tol,
            ..extra
        };
        Ok(file.overlay(flags))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the fixed, random, test and shifted training distributions
    Synth(commands::SynthArgs),
    /// Fit a smoothed classifier and bootstrap ensemble on a labelled CSV
    Fit(commands::FitArgs),
    /// Score feature vectors with every reliability metric
    Score(commands::ScoreArgs),
    /// Run the replicated accuracy-acceptance grid
    Experiment(commands::ExperimentArgs),
    /// Summarize a curves CSV and redraw its figures
    Report(commands::ReportArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Fit(a) => commands::fit(a),
        Command::Score(a) => commands::score(a),
        Command::Experiment(a) => commands::experiment(a),
        Command::Report(a) => commands::report(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}
