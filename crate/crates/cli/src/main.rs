//! Command line front end: capacity sweeps, Monte Carlo sessions, fringe
//! tabulation, and decoy-level validation.
//!
//! Exit codes: 0 on success (an aborted session still reports cleanly),
//! 1 when `validate-decoy` finds a violated clause, 2 on usage or
//! configuration errors, 3 on internal numerical failures.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use qsdc_core::estimators::EstimatorKind;
use qsdc_core::Result;

use commands::{FringeRequest, SimulateRequest, SweepRequest, ValidateRequest};
use config::{parse_grid_spec, GridSpec, RunConfig};

#[derive(Parser)]
#[command(
    name = "qsdc",
    version,
    about = "Capacity bounds and Monte Carlo simulation for phase-encoded DL04 QSDC"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the secrecy-capacity lower bound over round-trip attenuation.
    CapacitySweep(SweepArgs),
    /// Run a seeded protocol session and compare it with the closed forms.
    Simulate(SimulateArgs),
    /// Tabulate the interference fringe and recover its visibility.
    Fringe(FringeArgs),
    /// Check decoy intensity levels against the feasibility clauses.
    ValidateDecoy(ValidateArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum EstimatorArg {
    Gllp,
    Decoy,
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(arg: EstimatorArg) -> Self {
        match arg {
            EstimatorArg::Gllp => EstimatorKind::Gllp,
            EstimatorArg::Decoy => EstimatorKind::Decoy,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// JSON run configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Photon-number estimator feeding the capacity bound.
    #[arg(long, value_enum)]
    estimator: Option<EstimatorArg>,
    /// Signal intensities to sweep, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    mu: Option<Vec<f64>>,
    /// Round-trip attenuation grid in dB.
    #[arg(long, value_parser = parse_grid_spec, value_name = "START:STOP:STEP")]
    alpha: Option<GridSpec>,
    /// Bound the two-photon leakage by its collective-attack value (true)
    /// or write those pulses off as fully leaked (false).
    #[arg(long, value_name = "BOOL")]
    include_two_photon_term: Option<bool>,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Print the effective configuration to stderr.
    #[arg(long)]
    echo_config: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON run configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Signal intensities to simulate, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    mu: Option<Vec<f64>>,
    /// Pulses per session.
    #[arg(long, value_name = "N")]
    pulses: Option<u64>,
    /// Session seed.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Also write a CSV summary here.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Print the effective configuration to stderr.
    #[arg(long)]
    echo_config: bool,
}

#[derive(Args)]
struct FringeArgs {
    /// JSON run configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Print the effective configuration to stderr.
    #[arg(long)]
    echo_config: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// JSON run configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Signal intensities to validate against the configured levels.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    mu: Option<Vec<f64>>,
    /// Print the effective configuration to stderr.
    #[arg(long)]
    echo_config: bool,
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    match path {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    }
}

fn effective_mus(cli: &Option<Vec<f64>>, config: &RunConfig) -> Vec<f64> {
    match cli {
        Some(list) if !list.is_empty() => list.clone(),
        _ => vec![config.mu],
    }
}

fn echo(config: &RunConfig, wanted: bool) {
    if wanted {
        eprintln!("{}", config.to_json());
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::CapacitySweep(args) => {
            let mut config = load_config(&args.config)?;
            if let Some(grid) = args.alpha {
                config.alpha_start = grid.start;
                config.alpha_stop = grid.stop;
                config.alpha_step = grid.step;
            }
            if let Some(est) = args.estimator {
                config.estimator = EstimatorKind::from(est).to_string();
            }
            if let Some(include) = args.include_two_photon_term {
                config.include_two_photon_term = include;
            }
            echo(&config, args.echo_config);
            let estimator = EstimatorKind::from_str(&config.estimator)?;
            let grid = GridSpec::new(config.alpha_start, config.alpha_stop, config.alpha_step)?;
            let request = SweepRequest {
                mus: effective_mus(&args.mu, &config),
                estimator,
                grid,
                include_two_photon_term: args.include_two_photon_term,
                out: args.out,
                config,
            };
            commands::capacity_sweep(&request)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate(args) => {
            let mut config = load_config(&args.config)?;
            if let Some(pulses) = args.pulses {
                config.pulses = pulses;
            }
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            echo(&config, args.echo_config);
            let request = SimulateRequest {
                mus: effective_mus(&args.mu, &config),
                pulses: config.pulses,
                seed: config.seed,
                out: args.out,
                config,
            };
            commands::simulate(&request)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fringe(args) => {
            let config = load_config(&args.config)?;
            echo(&config, args.echo_config);
            let request = FringeRequest {
                out: args.out,
                config,
            };
            commands::fringe(&request)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ValidateDecoy(args) => {
            let config = load_config(&args.config)?;
            echo(&config, args.echo_config);
            let request = ValidateRequest {
                mus: effective_mus(&args.mu, &config),
                config,
            };
            let all_ok = commands::validate_decoy(&request)?;
            Ok(if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_validation() { 2 } else { 3 })
        }
    }
}
