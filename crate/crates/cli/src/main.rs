//! `kepler`: stage-wise and end-to-end driver for the law discovery pipeline.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<kepler_core::Error> for CliError {
    fn from(e: kepler_core::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "kepler",
    version,
    about = "Rediscover Kepler's and Newton's laws from Tycho Brahe's Mars positions"
)]
pub struct Cli {
    /// Suppress progress lines on stderr.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a catalog and write the two normalised training sets.
    Ingest(IngestArgs),
    /// Train a network on a normalised training set.
    FitNn(FitArgs),
    /// Resample a trained network, or derive kinematics from a theta(t) model.
    Augment(AugmentArgs),
    /// Simulated-annealing symbolic regression on a CSV table.
    Symreg(SymregArgs),
    /// Read physical constants off selected laws.
    Interpret(InterpretArgs),
    /// Write a synthetic two-body catalog.
    Oracle(OracleArgs),
    /// Run every stage and write all artifacts plus a report.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Catalog CSV; the bundled Tycho table when omitted.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = kepler_core::ephemeris::MARS_PERIOD_DAYS)]
    pub period_days: f64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Normalised dataset written by `ingest`.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Artifact stem: writes `model_<name>.txt` and `loss_<name>.csv`.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub validation_size: Option<usize>,
    /// `key = value` file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Model checkpoint written by `fit-nn`.
    #[arg(long)]
    pub model: PathBuf,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of uniform samples.
    #[arg(long, conflicts_with = "kinematics")]
    pub n: Option<usize>,
    /// Column names for the input and output, comma separated.
    #[arg(long, default_value = "input,output", conflicts_with = "kinematics")]
    pub names: String,
    /// Treat the model as theta(t) and write angular-velocity kinematics.
    #[arg(long)]
    pub kinematics: bool,
    /// Distance law r(theta) as an expression in x0.
    #[arg(long, requires = "kinematics", conflicts_with = "law_archive")]
    pub law: Option<String>,
    /// Take the distance law from the knee of this archive.
    #[arg(long, requires = "kinematics")]
    pub law_archive: Option<PathBuf>,
    #[arg(long, default_value_t = 28, requires = "kinematics")]
    pub points: usize,
    #[arg(long, default_value_t = kepler_core::augment::DEFAULT_DELTA_DAYS)]
    pub delta_days: f64,
    #[arg(long, default_value_t = kepler_core::ephemeris::MARS_PERIOD_DAYS)]
    pub period_days: f64,
    /// Also write the `r,r2,r3,w2` table here.
    #[arg(long, requires = "kinematics")]
    pub features_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SymregArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub target: String,
    /// Variable columns, comma separated; all non-target columns by default.
    #[arg(long)]
    pub features: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Prefix for the written file names.
    #[arg(long, default_value = "")]
    pub prefix: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Operation list such as `add,mul,div,cos` or `+,-,*,/,cos`.
    #[arg(long)]
    pub ops: Option<String>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub max_size: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub polish: Option<bool>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InterpretArgs {
    /// Archive of the r(theta) search.
    #[arg(long)]
    pub first: Option<PathBuf>,
    /// Archive of the w2 search.
    #[arg(long)]
    pub second: Option<PathBuf>,
    /// Kinematics CSV written by `augment --kinematics`.
    #[arg(long)]
    pub kinematics: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = kepler_core::oracle::OrbitSpec::MARS.eps)]
    pub eps: f64,
    /// Semi-latus rectum, AU.
    #[arg(long, default_value_t = kepler_core::oracle::OrbitSpec::MARS.l)]
    pub l: f64,
    #[arg(long, default_value_t = kepler_core::oracle::OrbitSpec::MARS.period)]
    pub period_days: f64,
    #[arg(long, default_value_t = kepler_core::oracle::OrbitSpec::MARS.phi0)]
    pub phi0: f64,
    #[arg(long, default_value_t = 28)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Longitude noise, arcseconds.
    #[arg(long, default_value_t = 0.0)]
    pub noise_theta: f64,
    /// Relative distance noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise_r: f64,
    /// Refuse any noise setting.
    #[arg(long, conflicts_with_all = ["noise_theta", "noise_r"])]
    pub noiseless: bool,
    /// Output catalog CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// `key = value` file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Reuse a trained r(theta) checkpoint.
    #[arg(long)]
    pub r_model: Option<PathBuf>,
    /// Reuse a trained theta(t) checkpoint.
    #[arg(long)]
    pub theta_model: Option<PathBuf>,
    /// Any further `key=value` setting; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
