//! `parma`: command-line access to periodic ARMA analysis.
//!
//! Exit status: 0 on success, 1 when a model or series fails validation (or
//! the requested quantity does not exist), 2 on I/O, parse or usage errors.

mod commands;
mod error;
mod input;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use parma_core::sim::Innovation;

use crate::commands::SimulateArgs;
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "parma",
    version,
    about = "Periodic ARMA models: Green weights, forecasts, moments, stationarity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Law {
    Gaussian,
    StudentT,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate sample paths as `time,season,y,epsilon` rows.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        /// Observations per path after burn-in.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        length: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        replications: u64,
        /// Defaults to a length that lets the start-up transient die out.
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long, value_enum, default_value = "gaussian")]
        innovation: Law,
        /// Degrees of freedom for Student-t innovations.
        #[arg(long, default_value_t = 5.0)]
        df: f64,
        /// Time index of the first reported observation.
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        start: i64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Multi-step forecasts from the end of an observed series.
    Forecast {
        #[arg(long)]
        model: PathBuf,
        /// `time,season,value[,epsilon]` file.
        #[arg(long)]
        series: PathBuf,
        #[arg(short = 'H', long, value_parser = clap::value_parser!(u64).range(1..))]
        horizon: u64,
        /// Interval half-width in units of the forecast standard error.
        #[arg(long, default_value_t = 1.96)]
        z: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Unconditional mean, variance and autocovariances per season.
    Moments {
        #[arg(long)]
        model: PathBuf,
        /// Largest autocovariance lag.
        #[arg(short = 'K', long, default_value_t = 0)]
        lags: usize,
        /// Truncation lag of the MA(∞) sums.
        #[arg(short = 'R', long, value_parser = clap::value_parser!(u64).range(1..))]
        truncation: Option<u64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Root-based stationarity verdict and Green-weight cross-check.
    Stationarity {
        #[arg(long)]
        model: PathBuf,
        /// Tolerance for |ξ_{t,l}| = |det Φ(l)|.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Table of ξ and ξ* for every anchor season.
    Greens {
        #[arg(long)]
        model: PathBuf,
        #[arg(short = 'H', long, value_parser = clap::value_parser!(u64).range(1..))]
        horizon: u64,
        /// Only this anchor season.
        #[arg(long)]
        season: Option<usize>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Time the recurrence against LU determinants.
    Bench {
        /// Defaults to a built-in PAR(4;365) model.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Matrix orders to time.
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,365")]
        orders: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check a model file and report problems.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            model,
            length,
            seed,
            replications,
            burn_in,
            innovation,
            df,
            start,
            output,
        } => {
            let m = input::read_model(&model)?;
            let innovation = match innovation {
                Law::Gaussian => Innovation::Gaussian,
                Law::StudentT => Innovation::StudentT { df },
            };
            let args = SimulateArgs {
                length: length as usize,
                seed,
                replications: replications as usize,
                burn_in,
                innovation,
                start,
            };
            write_output(output.as_deref(), &commands::simulate_cmd(m, &args)?)
        }
        Command::Forecast {
            model,
            series,
            horizon,
            z,
            output,
        } => {
            let m = input::read_model(&model)?;
            let s = input::read_series(&series, &m)?;
            let mut notes = Vec::new();
            let text = commands::forecast_cmd(&m, &s, horizon as usize, z, &mut notes)?;
            for n in notes {
                eprintln!("note: {n}");
            }
            write_output(output.as_deref(), &text)
        }
        Command::Moments {
            model,
            lags,
            truncation,
            output,
        } => {
            let m = input::read_model(&model)?;
            let text = commands::moments_cmd(&m, lags, truncation.map(|r| r as usize))?;
            write_output(output.as_deref(), &text)
        }
        Command::Stationarity {
            model,
            tolerance,
            output,
        } => {
            let m = input::read_model(&model)?;
            write_output(
                output.as_deref(),
                &commands::stationarity_cmd(&m, tolerance),
            )
        }
        Command::Greens {
            model,
            horizon,
            season,
            output,
        } => {
            let m = input::read_model(&model)?;
            write_output(
                output.as_deref(),
                &commands::greens_cmd(&m, horizon as usize, season)?,
            )
        }
        Command::Bench {
            model,
            orders,
            reps,
            output,
        } => {
            let m = match model {
                Some(path) => input::read_model(&path)?,
                None => commands::bench_default_model(),
            };
            if orders.is_empty() || orders.contains(&0) {
                return Err(CliError::Usage(
                    "--orders must list positive matrix orders".into(),
                ));
            }
            write_output(output.as_deref(), &commands::bench_cmd(&m, &orders, reps))
        }
        Command::Validate { model } => {
            let spec = input::read_spec(&model)?;
            let (text, ok) = commands::validate_cmd(spec);
            print!("{text}");
            if ok {
                Ok(())
            } else {
                Err(CliError::Invalid(format!(
                    "{}: invalid model",
                    model.display()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
