// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: resonance tables, sequence synthesis, trajectory
//! simulation and error-landscape scans, written as JSON and CSV.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;
pub mod document;
pub mod error;
pub mod output;

pub use error::{CliError, CliResult};

use config::{TimeFrame, TrajectoryFrame};

#[derive(Debug, Parser)]
#[command(
    name = "arp-shortcuts",
    version,
    about = "Pulse sequences for detuning-only population transfer"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file with default values for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Initial field angle θ_i in radians (accepts "pi" suffix).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta_i: Option<String>,

    /// Final field angle θ_f in radians (accepts "pi" suffix).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta_f: Option<String>,

    /// Initial detuning Δ/Ω.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta_start: Option<f64>,

    /// Final detuning Δ/Ω.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta_end: Option<f64>,

    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DurationArgs {
    /// Total duration, e.g. "1.5pi".
    #[arg(long)]
    pub duration: Option<String>,

    /// Time axis of --duration.
    #[arg(long, value_enum)]
    pub frame: Option<TimeFrame>,

    /// Number of off-pulses to use instead of the selection rule.
    #[arg(long)]
    pub m_override: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Constant-pulse resonances u_k, T'_k and T_k.
    Resonances {
        #[arg(long)]
        k_max: Option<u32>,
    },
    /// Minimal-amplitude pulse sequence for a given duration.
    Synthesize {
        #[command(flatten)]
        duration: DurationArgs,
    },
    /// Trajectory of a sequence file as CSV.
    Simulate {
        /// Sequence document written by `synthesize`.
        #[arg(long, value_name = "FILE")]
        sequence: Option<PathBuf>,

        /// Frame in which the state is propagated and reported.
        #[arg(long, value_enum)]
        trajectory: Option<TrajectoryFrame>,

        /// Points per segment (adiabatic) or output points (original).
        #[arg(long)]
        samples: Option<usize>,

        /// Integrator tolerance for the original frame.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Logarithmic error over a grid, as long-format CSV.
    Scan {
        #[arg(value_enum)]
        kind: ScanKind,

        /// start:stop:n; give twice for the landscape (u grid, then T grid).
        #[arg(long)]
        grid: Vec<String>,

        /// Template sequence for `u` and `tau1` scans.
        #[arg(long, value_name = "FILE")]
        sequence: Option<PathBuf>,

        #[command(flatten)]
        duration: DurationArgs,

        /// Report dips of 1-D scans at or below this log-error.
        #[arg(long, allow_hyphen_values = true)]
        threshold: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanKind {
    /// Constant pulse, error vs original duration T.
    Constant,
    /// Sequence family, error vs amplitude u.
    U,
    /// Sequence family, error vs first-pulse duration τ1.
    Tau1,
    /// On-off-on family over (u, T).
    Landscape,
}

pub fn run(cli: Cli) -> CliResult<()> {
    let file = match &cli.common.config {
        Some(path) => config::FileConfig::load(path)?,
        None => config::FileConfig::default(),
    };
    let ctx = commands::Context::new(&cli.common, file)?;
    match cli.command {
        Command::Resonances { k_max } => commands::resonances(&ctx, k_max),
        Command::Synthesize { duration } => commands::synthesize(&ctx, &duration),
        Command::Simulate {
            sequence,
            trajectory,
            samples,
            tol,
        } => commands::simulate(&ctx, sequence, trajectory, samples, tol),
        Command::Scan {
            kind,
            grid,
            sequence,
            duration,
            threshold,
        } => commands::scan(&ctx, kind, grid, sequence, &duration, threshold),
    }
}
