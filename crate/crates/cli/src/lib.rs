//! Command-line driver: configuration handling, subcommands and output.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dpsqkd_core::OverlapConvention;
use thiserror::Error;

use commands::{Outcome, SubaddArgs, SweepArgs};
use config::{ConfigOverrides, SimulationConfig};

pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidConfig(_) | CliError::Io(_) => EXIT_INVALID_CONFIG,
            CliError::Numerical(_) | CliError::Internal(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<dpsqkd_core::Error> for CliError {
    fn from(e: dpsqkd_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::InvalidConfig(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "dpsqkd",
    version,
    about = "DPS-QKD simulator and key-rate calculator"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// JSON file with any of the configuration fields; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub n_pulses: Option<usize>,
    #[arg(long, global = true)]
    pub n_blocks: Option<usize>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `paper` (overlap exp(-4 alpha^2)) or `standard` (exp(-2 alpha^2))
    #[arg(long, global = true)]
    pub overlap_convention: Option<OverlapConvention>,
    #[arg(long, global = true)]
    pub publish_fraction: Option<f64>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

impl GlobalArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            n_pulses: self.n_pulses,
            n_blocks: self.n_blocks,
            alpha: self.alpha,
            eta: self.eta,
            seed: self.seed,
            overlap_convention: self.overlap_convention,
            publish_fraction: self.publish_fraction,
        }
    }

    pub fn resolve(&self) -> Result<SimulationConfig, CliError> {
        SimulationConfig::resolve(self.config.as_deref(), &self.overrides())
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Key-rate bound for the exact binomial click statistics
    Keyrate,
    /// Monte Carlo run followed by estimation and the empirical key-rate bound
    Simulate,
    /// Asymptotic per-pulse key rate over a grid of amplitudes
    SweepAlpha {
        #[arg(long, default_value_t = 0.05)]
        alpha_min: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha_max: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Randomized check of conditional-entropy super-subadditivity
    VerifySubadd {
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Also write every trial to this CSV file
        #[arg(long)]
        trial_log: Option<PathBuf>,
    },
}

/// Executes a parsed command line and returns its rendered output.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let config = cli.global.resolve()?;
    let format = cli.global.format;
    match &cli.command {
        Command::Keyrate => commands::cmd_keyrate(&config, format.unwrap_or(Format::Json)),
        Command::Simulate => commands::cmd_simulate(&config, format.unwrap_or(Format::Json)),
        Command::SweepAlpha {
            alpha_min,
            alpha_max,
            steps,
        } => commands::cmd_sweep_alpha(
            &config,
            SweepArgs {
                alpha_min: *alpha_min,
                alpha_max: *alpha_max,
                steps: *steps,
            },
            format.unwrap_or(Format::Csv),
        ),
        Command::VerifySubadd {
            n_max,
            trials,
            trial_log,
        } => commands::cmd_verify_subadd(
            SubaddArgs {
                n_max: *n_max,
                trials: *trials,
                seed: config.seed,
            },
            format.unwrap_or(Format::Json),
            trial_log.as_deref(),
        ),
    }
}
