//! `couette-waves`: traveling waves near Couette flow from the command line.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use config::{Format, RunConfig, Settings};
use output::{emit, Report, SCHEMA};

#[derive(Debug, Parser)]
#[command(name = "couette-waves", version, about = "Traveling waves near Couette flow")]
struct Cli {
    /// TOML file with any of the flag names as keys (snake_case).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Tabulate the profile and its band functions.
    ProfileTable,
    /// Solve the scalar eigenvalue equation for λ₁.
    Lambda1,
    /// Compute and certify the bifurcation eigenpair.
    Bifurcate,
    /// Adjointness, inversion, range and coercivity checks.
    RangeCheck,
    /// Singular values of the mode blocks at the bifurcation speed.
    SvdSpectrum,
    /// Export f^σ and the vorticity on the band grid with level curves.
    WaveExport,
    /// Branch residual ‖F[λ, σh]‖ for a list of σ.
    Residual,
    /// Sobolev distances of the wave vorticity.
    Norms,
    /// Norms over a grid of (ε, κ, σ).
    Sweep,
    /// Kernel identities of the strip Green's function.
    ValidateIdentities,
}

impl Command {
    fn default_format(self) -> Format {
        match self {
            Command::Sweep => Format::Csv,
            _ => Format::Json,
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let settings = match &cli.config {
        Some(p) => cli.settings.merged(Settings::from_file(p)?),
        None => cli.settings,
    };
    let cfg = RunConfig::resolve(settings)?;
    let (report, failure): (Report, Option<String>) = match cli.command {
        Command::ProfileTable => (commands::profile_table(&cfg)?, None),
        Command::Lambda1 => (commands::lambda1(&cfg)?, None),
        Command::Bifurcate => commands::bifurcate(&cfg)?,
        Command::RangeCheck => commands::range_check(&cfg)?,
        Command::SvdSpectrum => (commands::svd(&cfg)?, None),
        Command::WaveExport => (commands::wave_export(&cfg)?, None),
        Command::Residual => (commands::residual(&cfg)?, None),
        Command::Norms => (commands::norms(&cfg)?, None),
        Command::Sweep => (commands::sweep(&cfg)?, None),
        Command::ValidateIdentities => commands::validate_identities(&cfg)?,
    };
    let format = cfg.format.unwrap_or(cli.command.default_format());
    emit(&report, format, cfg.out.as_deref())?;
    match failure {
        Some(msg) => Err(anyhow!(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let doc = json!({ "schema": SCHEMA, "status": "error", "error": format!("{e:#}") });
            eprintln!("{doc}");
            ExitCode::FAILURE
        }
    }
}
