//! `ntraub`: radii, bounds, solves, model checks and example reproduction.
//!
//! Exit codes: 0 success, 1 internal or I/O failure, 2 bad config or model,
//! 3 singular Jacobian, 4 no convergence, 5 reproduction mismatch.

mod commands;
mod config;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ntraub::reproduce::Example;
use ntraub::Error;

#[derive(Parser)]
#[command(name = "ntraub", version, about = "Newton-Traub iteration with kappa-average convergence theory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config with keys model, problem, x0, options.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence and uniqueness radii of a model.
    Radius,
    /// Contraction constants and error-bound sequences.
    Bounds,
    /// Run the iteration on a named problem.
    Solve,
    /// Sample the Lipschitz conditions of a model on a problem.
    Verify,
    /// Recompute the worked examples and compare with reference values.
    Reproduce {
        #[arg(value_enum, default_value_t = Which::All)]
        which: Which,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Ex61,
    Ex62,
    Ex63,
    All,
}

/// A message and the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Self { code, msg: msg.into() }
    }

    fn config(msg: impl Into<String>) -> Self {
        Self::new(2, msg)
    }

    fn internal(e: anyhow::Error) -> Self {
        Self::new(1, format!("{e:#}"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SingularJacobian { .. } => 3,
            Error::Model(_)
            | Error::NoRadius { .. }
            | Error::Domain { .. }
            | Error::DimensionMismatch { .. }
            | Error::UnknownProblem(_)
            | Error::NotFound { .. } => 2,
            _ => 1,
        };
        Self::new(code, e.to_string())
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let cfg = config::load(cli.config.as_deref()).map_err(|e| Failure::config(format!("{e:#}")))?;
    let ctx = commands::Ctx {
        cfg,
        format: cli.format,
        out: cli.out,
        seed: cli.seed,
        tol: cli.tol,
        max_iter: cli.max_iter,
    };
    match cli.command {
        Command::Radius => commands::radius(&ctx),
        Command::Bounds => commands::bounds(&ctx),
        Command::Solve => commands::solve(&ctx),
        Command::Verify => commands::verify(&ctx),
        Command::Reproduce { which } => {
            let which = match which {
                Which::Ex61 => Some(Example::Ex61),
                Which::Ex62 => Some(Example::Ex62),
                Which::Ex63 => Some(Example::Ex63),
                Which::All => None,
            };
            commands::reproduce(&ctx, which)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
