use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;
mod svg;

use commands::{CliError, Figure, EXIT_CONFIG};
use config::{CommonArgs, RunConfig};
use output::emit;

/// Adiabatic transport through a driven three-site ring.
#[derive(Parser, Debug)]
#[command(name = "ringstir", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Adiabatic energies on a grid of dot potentials.
    Spectrum(CommonArgs),
    /// Conductance, integrated current and occupations on a grid.
    Sweep(CommonArgs),
    /// Time-dependent propagation of a linear sweep from u_min to u_max.
    Dynamics(CommonArgs),
    /// Regime labels over a (c1, c2) grid at fixed c0.
    Regimes(CommonArgs),
    /// Data bundles and plots for the standard parameter sets.
    Figures {
        #[arg(value_enum)]
        which: Figure,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("RINGSTIR_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| CliError {
        code: EXIT_CONFIG,
        message: format!("RINGSTIR_THREADS must be a positive integer, got {value:?}"),
    })?;
    if threads == 0 {
        return Err(CliError {
            code: EXIT_CONFIG,
            message: "RINGSTIR_THREADS must be at least 1".into(),
        });
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError {
            code: EXIT_CONFIG,
            message: e.to_string(),
        })
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Spectrum(args) => {
            let cfg = RunConfig::from_args(&args)?;
            emit(&commands::spectrum(&cfg)?, cfg.out.as_deref())?;
        }
        Command::Sweep(args) => {
            let cfg = RunConfig::from_args(&args)?;
            let result = commands::sweep(&cfg)?;
            emit(&result.text, cfg.out.as_deref())?;
            if let Some(out) = &cfg.out {
                let mut sidecar = serde_json::to_string_pretty(&result.meta).expect("metadata serialises");
                sidecar.push('\n');
                emit(&sidecar, Some(&commands::sidecar_path(out)))?;
            }
        }
        Command::Dynamics(args) => {
            let cfg = RunConfig::from_args(&args)?;
            emit(&commands::dynamics(&cfg)?, cfg.out.as_deref())?;
        }
        Command::Regimes(args) => {
            let cfg = RunConfig::from_args(&args)?;
            let result = commands::regimes(&cfg)?;
            emit(&result.text, cfg.out.as_deref())?;
            if let Some(svg) = &cfg.svg {
                emit(&result.svg, Some(svg))?;
            }
        }
        Command::Figures { which, common } => {
            let cfg = RunConfig::from_args(&common)?;
            let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
            let artifacts = commands::figures(which, &cfg)?;
            commands::write_artifacts(&dir, &artifacts)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
