//! Command-line front end: strict JSON configs in, CSV tables and a JSON
//! run manifest out.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Numerics(#[from] viscid_waves::Error),
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Validation(_) => "validation",
            CliError::Numerics(e) => match e {
                viscid_waves::Error::Domain(_) => "domain",
                viscid_waves::Error::Range(_) => "range",
                viscid_waves::Error::Numeric(_) => "numeric",
                viscid_waves::Error::NoConvergence { .. } => "no_convergence",
                viscid_waves::Error::Config(_) => "config",
                viscid_waves::Error::Blowup { .. } => "blowup",
                viscid_waves::Error::DomainTooSmall { .. } => "domain_too_small",
            },
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind() {
            "config" | "domain" => 2,
            _ => 1,
        }
    }
}

/// Machine-readable failure report.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
}

#[derive(Debug, Parser)]
#[command(name = "viscid-waves", version, about = "Viscous long-wave solvers")]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "VISCID_WAVES_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Complex phase velocity over a k-sweep, with both asymptotic forms.
    Dispersion {
        #[arg(long)]
        config: PathBuf,
    },
    /// Boundary-layer velocity profiles and bottom shear stress.
    Blayer {
        #[arg(long)]
        config: PathBuf,
    },
    /// Time integration of the viscous Boussinesq system.
    Boussinesq {
        #[arg(long)]
        config: PathBuf,
    },
    /// Time integration of the viscous KdV equation.
    Kdv {
        #[arg(long)]
        config: PathBuf,
        #[command(subcommand)]
        action: Option<KdvAction>,
    },
    /// Runs the oracle suite and reports measured errors.
    Validate,
}

#[derive(Debug, Subcommand)]
pub enum KdvAction {
    /// Runs every kernel variant from the same initial condition.
    Compare,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dispersion { .. } => "dispersion",
            Command::Blayer { .. } => "blayer",
            Command::Boussinesq { .. } => "boussinesq",
            Command::Kdv { action: None, .. } => "kdv",
            Command::Kdv { action: Some(KdvAction::Compare), .. } => "kdv compare",
            Command::Validate => "validate",
        }
    }
}

/// Runs one subcommand; the caller turns errors into an exit code.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        // A second initialisation (e.g. in tests) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut out = output::OutDir::create(&cli.out)?;
    match &cli.command {
        Command::Dispersion { config } => commands::dispersion(config, &mut out),
        Command::Blayer { config } => commands::blayer(config, &mut out),
        Command::Boussinesq { config } => commands::boussinesq(config, &mut out),
        Command::Kdv { config, action: None } => commands::kdv(config, &mut out),
        Command::Kdv { config, action: Some(KdvAction::Compare) } => commands::kdv_compare(config, &mut out),
        Command::Validate => commands::validate(&mut out),
    }
}
