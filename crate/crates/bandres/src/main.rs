//! Command-line interface: `run` a config file, run a built-in `preset`,
//! or `sweep-dims` across basis dimensions. Exit codes: 0 success, 2
//! configuration error, 3 numerical/runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bandres::cli_runner::presets::PresetParams;
use bandres::cli_runner::report::ReportFormat;
use bandres::cli_runner::{
    load_config_run, run_config, run_preset, run_sweep_dims, CliError, RunOverrides,
};

#[derive(Parser)]
#[command(
    name = "bandres",
    about = "Bound-state and resonance energies of polynomially perturbed oscillators",
    long_about = "Computes eigenvalues of H = -alpha*D^2 + V(x) in a complex-width oscillator \
                  basis via banded inverse iteration, scanning an energy window and keeping \
                  eigenvalues that persist across scan steps."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutputOpts {
    /// Report format: json, csv, or text
    #[arg(long, default_value = "json")]
    format: String,
    /// Report path (default: "<name>_report.<ext>" in the working directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the convergence tolerance on successive estimates
    #[arg(long)]
    tol: Option<f64>,
    /// Override the iteration cap
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a TOML problem configuration
    Run {
        /// Path to the configuration file
        config: PathBuf,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Execute a built-in preset
    Preset {
        /// Preset name (triple-well-resonance, triple-well-bound, pt-cubic,
        /// cubic-oscillator, unorthodox, double-well)
        name: String,
        /// Physical overrides, repeatable: --set g=0.24 --set dim=200
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Re-run a config or preset at several basis dimensions
    SweepDims {
        /// Path to a configuration file (omit when using --preset)
        config: Option<PathBuf>,
        /// Preset name instead of a config file
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Physical overrides for --preset, repeatable
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Comma-separated ascending dimensions, e.g. --dims 10,20,40,80
        #[arg(long, required = true, value_delimiter = ',')]
        dims: Vec<usize>,
        #[command(flatten)]
        output: OutputOpts,
    },
}

fn dispatch(cli: Cli) -> Result<PathBuf, CliError> {
    match cli.command {
        Command::Run { config, output } => {
            let format = ReportFormat::parse(&output.format)?;
            run_config(
                &config,
                format,
                output.out.clone(),
                &RunOverrides {
                    tol: output.tol,
                    max_iters: output.max_iters,
                },
            )
        }
        Command::Preset { name, set, output } => {
            let format = ReportFormat::parse(&output.format)?;
            let params = PresetParams::from_pairs(&set)?;
            run_preset(
                &name,
                &params,
                format,
                output.out.clone(),
                &RunOverrides {
                    tol: output.tol,
                    max_iters: output.max_iters,
                },
            )
        }
        Command::SweepDims {
            config,
            preset,
            set,
            dims,
            output,
        } => {
            let format = ReportFormat::parse(&output.format)?;
            let overrides = RunOverrides {
                tol: output.tol,
                max_iters: output.max_iters,
            };
            let (runs, stem) = match (config, preset) {
                (Some(path), None) => {
                    let run = load_config_run(&path)?;
                    let stem = run.label.clone();
                    (vec![run], stem)
                }
                (None, Some(name)) => {
                    let params = PresetParams::from_pairs(&set)?;
                    let runs = bandres::cli_runner::presets::preset_runs(&name, &params)?;
                    (runs, name)
                }
                (None, None) => {
                    return Err(CliError::Config(
                        "sweep-dims needs a config path or --preset NAME".into(),
                    ))
                }
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            let stem = format!("{stem}_dims");
            run_sweep_dims(&runs, &dims, &stem, format, output.out.clone(), &overrides)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(path) => {
            println!("report written to {}", path.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
