//! `cuspkit` command-line front-end.
//!
//! Exit codes: 0 success, 2 a cusp condition fails, 3 numerical failure,
//! 4 bad configuration or input.

// `!(a < b)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

/// Version tag written into every JSON document.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 4,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }

    pub fn from_core(e: cuspkit_core::Error) -> Self {
        if e.is_config() {
            CliError::config(e.to_string())
        } else {
            CliError::numerical(e.to_string())
        }
    }

    pub fn io(e: std::io::Error) -> Self {
        CliError::config(format!("i/o error: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cuspkit",
    version,
    about = "Cusped singularities in symmetric two-cell slow-fast systems"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in model: curtu or morris_lecar.
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Parameter override `name=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file (stdout when absent).
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Locate the symmetric fold, test the cusp and check the conditions.
    Analyze,
    /// Integrate the full system and write the trajectory as CSV.
    Simulate(commands::SimulateArgs),
    /// Classify small and large oscillations in a trajectory CSV.
    Signature(commands::SignatureArgs),
    /// Locate the singular Hopf point along a parameter.
    Hopf(commands::HopfArgs),
    /// Trace the fold curve through the cusp and fit its exponent.
    Fold(commands::FoldArgs),
    /// Analyze and simulate over a grid of one or two parameters.
    Sweep(commands::SweepArgs),
}

fn resolve_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &common.model {
        cfg.model = m.clone();
    }
    if let Some(e) = common.epsilon {
        cfg.epsilon = Some(e);
    }
    for s in &common.set {
        cfg.set(s)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let mut cfg = resolve_config(&cli.common)?;
    let out = cli.common.out.as_deref();
    match cli.command {
        Command::Analyze => commands::analyze(&cfg, out),
        Command::Simulate(a) => commands::simulate(&mut cfg, &a, out),
        Command::Signature(a) => commands::signature(&mut cfg, &a, out),
        Command::Hopf(a) => commands::hopf(&cfg, &a, out),
        Command::Fold(a) => commands::fold(&cfg, &a, out),
        Command::Sweep(a) => commands::sweep(&mut cfg, &a, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
