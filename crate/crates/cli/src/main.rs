//! `irrcast`: prepare irradiance data, generate synthetic data, forecast
//! from a single model and run hyperparameter sweeps.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::GridName;

#[derive(Debug, Parser)]
#[command(name = "irrcast", version, about = "Short-term solar irradiance forecasting")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Run configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the grid of the configuration.
    #[arg(long, global = true, value_enum)]
    pub grid: Option<GridName>,
    /// Worker threads for the sweep.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Seed of the synthetic data generator.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Per-fit time budget for (S)ARIMA; 0 disables it.
    #[arg(long, global = true)]
    pub timeout_secs: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct LocationArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub latitude: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub longitude: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub elevation_m: Option<f64>,
    /// Local standard time minus UTC.
    #[arg(long, allow_hyphen_values = true)]
    pub utc_offset_minutes: Option<i32>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Resample a 1-min (or check a 15-min) irradiance CSV to 15 minutes
    /// and report gaps.
    Prepare {
        input: PathBuf,
        #[command(flatten)]
        location: LocationArgs,
        #[arg(long)]
        timestamp_column: Option<String>,
        #[arg(long)]
        value_column: Option<String>,
        #[arg(long)]
        zenith_column: Option<String>,
    },
    /// Generate a seeded synthetic 1-min irradiance CSV.
    Synth {
        #[command(flatten)]
        location: LocationArgs,
        /// First local day, YYYY-MM-DD.
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        days: Option<usize>,
    },
    /// Train one model and forecast the intervals after an origin.
    Forecast {
        /// Start of the origin interval, e.g. 2021-12-05T19:00:00Z.
        #[arg(long)]
        origin: String,
        /// TOML file with one point; defaults to the reference persistence.
        #[arg(long)]
        point: Option<PathBuf>,
        /// Dataset id; defaults to the first dataset.
        #[arg(long)]
        dataset: Option<String>,
    },
    /// Train and test every point of a grid on every dataset.
    Search,
    /// Box-plot statistics of a results file.
    Summarize {
        results: PathBuf,
        /// Comma-separated dimensions, e.g. `method,p`.
        #[arg(long, value_delimiter = ',')]
        group_by: Option<Vec<String>>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = std::panic::catch_unwind(|| run(cli));
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => ExitCode::from(2),
    }
}

fn run(cli: Cli) -> error::Result<()> {
    let g = &cli.global;
    match cli.command {
        Command::Prepare {
            input,
            location,
            timestamp_column,
            value_column,
            zenith_column,
        } => commands::prepare(g, &input, &location, [timestamp_column, value_column, zenith_column]),
        Command::Synth { location, start, days } => commands::synth(g, &location, start.as_deref(), days),
        Command::Forecast { origin, point, dataset } => {
            commands::forecast(g, &origin, point.as_deref(), dataset.as_deref())
        }
        Command::Search => commands::search(g),
        Command::Summarize { results, group_by } => commands::summarize(g, &results, group_by.as_deref()),
    }
}
