//! Command-line front end for the `jsccsj` tool.

use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use jsccsj_core::gaussian::GridSpec;
use jsccsj_core::matching::DEFAULT_TOL;
use jsccsj_core::sim::SimConfig;

pub mod commands;
pub mod spec_file;

use spec_file::{SpecError, SpecFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Spec {
        path: String,
        #[source]
        source: SpecError,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] jsccsj_core::Error),
}

#[derive(Debug, Parser)]
#[command(
    name = "jsccsj",
    version,
    about = "Uncoded communication against a correlated jammer"
)]
pub struct Cli {
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate a system description.
    Validate {
        /// Description file, or `-` for stdin.
        file: String,
    },
    /// Check the matching conditions for the file's profile.
    CheckMatched {
        file: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Grid points per variable (Gaussian systems).
        #[arg(long, default_value_t = 41)]
        points: usize,
        /// Grid half-width in standard deviations (Gaussian systems).
        #[arg(long, default_value_t = 4.0)]
        half_width: f64,
    },
    /// Compute both players' best responses and the Nash gaps.
    NashVerify {
        file: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Block length for the additional block-level checks.
        #[arg(long, default_value_t = 1)]
        block_n: usize,
    },
    /// Tabulate the distortion-cost curve as CSV.
    DeqCurve {
        file: String,
        /// Jammer budgets as `start:stop:step`.
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Monte Carlo transmission of the file's profile.
    Simulate {
        file: String,
        /// Block length.
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        blocks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a ready-made system description.
    Example {
        #[command(subcommand)]
        which: Example,
    },
}

#[derive(Debug, Subcommand)]
pub enum Example {
    /// Binary symmetric source and channel with Bernoulli jamming.
    Binary {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        pj: f64,
    },
    /// Mod-L additive system.
    Lary {
        #[arg(long = "L")]
        levels: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        pj: f64,
    },
    /// Scalar Gaussian system with linear strategies.
    Gaussian {
        #[arg(long)]
        pu: f64,
        #[arg(long)]
        sigma2: f64,
        #[arg(long)]
        pj: f64,
        #[arg(long, default_value_t = 1.0)]
        source_var: f64,
    },
}

fn read_input(path: &str) -> Result<String, CliError> {
    let io = |source| CliError::Io {
        path: path.to_string(),
        source,
    };
    if path == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).map_err(io)?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).map_err(io)
    }
}

/// Parses a description, labelling errors with `path`.
pub fn load(path: &str, text: &str) -> Result<SpecFile, CliError> {
    spec_file::parse(text).map_err(|source| CliError::Spec {
        path: path.to_string(),
        source,
    })
}

fn check_tol(tol: f64) -> Result<f64, CliError> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(tol)
    } else {
        Err(CliError::Usage(format!(
            "tolerance must be non-negative, got {tol}"
        )))
    }
}

/// Runs `command` on an already loaded description. Finite systems take
/// precedence when a file describes both kinds.
pub fn run_on(command: &Command, spec: &SpecFile) -> Result<String, CliError> {
    match command {
        Command::Validate { .. } => commands::validate(spec),
        Command::CheckMatched {
            tol,
            points,
            half_width,
            ..
        } => {
            let tol = check_tol(*tol)?;
            match (&spec.finite, &spec.gaussian) {
                (Some(f), _) => commands::check_matched_finite(f, tol),
                (None, Some(g)) => commands::check_matched_gaussian(
                    g,
                    GridSpec {
                        points: *points,
                        half_width: *half_width,
                    },
                    tol,
                ),
                (None, None) => unreachable!("parse requires a system"),
            }
        }
        Command::NashVerify { tol, block_n, .. } => {
            let tol = check_tol(*tol)?;
            match (&spec.finite, &spec.gaussian) {
                (Some(f), _) => commands::nash_verify_finite(f, tol, *block_n),
                (None, Some(g)) => commands::nash_verify_gaussian(g, tol),
                (None, None) => unreachable!("parse requires a system"),
            }
        }
        Command::DeqCurve { grid, tol, .. } => {
            let tol = check_tol(*tol)?;
            let f = spec
                .finite
                .as_ref()
                .ok_or_else(|| CliError::Usage("deq-curve needs a finite system".into()))?;
            commands::deq_curve(f, &commands::parse_grid(grid)?, tol)
        }
        Command::Simulate {
            n, blocks, seed, ..
        } => {
            let config = SimConfig::new(*n, *blocks, *seed)?;
            match (&spec.finite, &spec.gaussian) {
                (Some(f), _) => commands::simulate_finite(f, &config),
                (None, Some(g)) => commands::simulate_gaussian_spec(g, &config),
                (None, None) => unreachable!("parse requires a system"),
            }
        }
        Command::Example { .. } => Err(CliError::Usage("example takes no input file".into())),
    }
}

/// Runs a parsed command line and returns the text to print.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let file = match &cli.command {
        Command::Example { which } => {
            let spec = match *which {
                Example::Binary { p, pj } => commands::example_lary(2, p, pj)?,
                Example::Lary { levels, p, pj } => commands::example_lary(levels, p, pj)?,
                Example::Gaussian {
                    pu,
                    sigma2,
                    pj,
                    source_var,
                } => commands::example_gaussian(source_var, pu, sigma2, pj)?,
            };
            return Ok(spec_file::emit(&spec));
        }
        Command::Validate { file }
        | Command::CheckMatched { file, .. }
        | Command::NashVerify { file, .. }
        | Command::DeqCurve { file, .. }
        | Command::Simulate { file, .. } => file,
    };
    let text = read_input(file)?;
    let spec = load(file, &text)?;
    run_on(&cli.command, &spec)
}
