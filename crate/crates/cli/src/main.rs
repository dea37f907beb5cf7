//! `aqec-lab`: bounds, rate curves, erasure simulation and second-moment
//! checks for log-depth random encoders.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use aqec_core::LabError;
use commands::{
    BoundsArgs, CompareBlockArgs, CurvesArgs, LightconeArgs, SecondMomentArgs, SimulateArgs,
};
use config::Common;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lab(LabError),
    Io(String),
    Internal(String),
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        CliError::Lab(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lab(e) => e.exit_code() as u8,
            CliError::Io(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Lab(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "aqec-lab",
    version,
    about = "Random-encoder error-correction laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic Choi-error bounds.
    Bounds(BoundsArgs),
    /// Achievable-rate curves as CSV.
    Curves(CurvesArgs),
    /// Monte Carlo Choi error under erasure.
    Simulate(SimulateArgs),
    /// Block encoding against the double-layer circuit at matched block size.
    CompareBlock(CompareBlockArgs),
    /// Second-moment engines: Markov chain, transfer matrix, biased walk.
    SecondMoment(SecondMomentArgs),
    /// Light cones, disjoint logical set and depth lower bounds.
    Lightcone(LightconeArgs),
}

fn merged<T>(args: T, name: &str, common: impl Fn(&T) -> &Common) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned + Default,
{
    let path = common(&args).config.clone();
    config::merge(&args, path.as_deref(), name)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bounds(a) => commands::bounds(merged(a, "bounds", |a| &a.common)?),
        Command::Curves(a) => commands::curves(merged(a, "curves", |a| &a.common)?),
        Command::Simulate(a) => commands::simulate(merged(a, "simulate", |a| &a.common)?),
        Command::CompareBlock(a) => {
            commands::compare_block(merged(a, "compare-block", |a| &a.common)?)
        }
        Command::SecondMoment(a) => {
            commands::second_moment(merged(a, "second-moment", |a| &a.common)?)
        }
        Command::Lightcone(a) => commands::lightcone(merged(a, "lightcone", |a| &a.common)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aqec-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
