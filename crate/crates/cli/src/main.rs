//! `hocf-kit`: command-line front end for the observer canonical form
//! pipeline.
//!
//! Exit codes: 0 success, 1 failed check or numerical error, 2 bad
//! configuration, 3 kernel iteration did not converge.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod plot;
mod study;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::InputSpec;
use config::{CommonArgs, RunConfig};
use error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "hocf-kit",
    version,
    about = "Observer canonical form toolkit for 2×2 hyperbolic PDE–ODE systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the original system; writes traj.csv, final.csv, y.svg.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Boundary input: zero, step, pulse or sine:<period>.
        #[arg(long, default_value = "zero")]
        input: InputSpec,
        /// Initial state (JSON snapshot); zero if omitted.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Solve the trace parameterization kernels; writes kernels.csv.
    Kernels {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Build the canonical FDE; writes kernels.csv, fde.json.
    Canonical {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Map an output window (or state) to observer coordinates; writes
    /// ybar.json, eta.json, eta_dist.csv.
    ToHocf {
        #[command(flatten)]
        common: CommonArgs,
        /// Output window (JSON), as written by this command.
        #[arg(long, conflicts_with = "state")]
        ybar: Option<PathBuf>,
        /// Initial state (JSON snapshot); the pulse-excited state if neither
        /// this nor --ybar is given.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Map an observer state back to the original coordinates; writes
    /// ybar.json, state.json, state.csv.
    FromHocf {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        eta: PathBuf,
    },
    /// Simulate the observer form; writes hocf.csv, y.svg.
    SimulateHocf {
        #[command(flatten)]
        common: CommonArgs,
        /// Initial observer state; derived from the pulse-excited state if
        /// omitted.
        #[arg(long)]
        eta: Option<PathBuf>,
    },
    /// X → ȳ → η → ȳ → X convergence study; writes roundtrip.json.
    Roundtrip {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of resolutions, halving the step each time.
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Start from the zero state instead of the pulse-excited one.
        #[arg(long)]
        zero_state: bool,
    },
    /// Original versus observer-form output study; writes
    /// equivalence.json, y.svg.
    Equivalence {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long)]
        zero_state: bool,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate {
            common,
            input,
            state,
        } => commands::simulate(&RunConfig::from_args(&common)?, &input, state.as_ref()),
        Command::Kernels { common } => commands::kernels(&RunConfig::from_args(&common)?),
        Command::Canonical { common } => commands::canonical(&RunConfig::from_args(&common)?),
        Command::ToHocf {
            common,
            ybar,
            state,
        } => commands::to_hocf(
            &RunConfig::from_args(&common)?,
            ybar.as_ref(),
            state.as_ref(),
        ),
        Command::FromHocf { common, eta } => {
            commands::from_hocf(&RunConfig::from_args(&common)?, &eta)
        }
        Command::SimulateHocf { common, eta } => {
            commands::simulate_hocf_cmd(&RunConfig::from_args(&common)?, eta.as_ref())
        }
        Command::Roundtrip {
            common,
            levels,
            zero_state,
        } => commands::roundtrip(&RunConfig::from_args(&common)?, levels, zero_state),
        Command::Equivalence {
            common,
            levels,
            zero_state,
        } => commands::equivalence(&RunConfig::from_args(&common)?, levels, zero_state),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hocf-kit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
