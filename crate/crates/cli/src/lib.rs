// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: `gen`, `verify`, `gram`, `frame` and `decay-report`.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad configuration or input.

// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::Outcome;
pub use config::{Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "wavepacket", version, about = "Wave packet coverings, systems and Gram matrix diagnostics")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the index set (indices.csv) and the tiles (tiles.json).
    Gen,
    /// Check metric axioms, separation, summability, covering and weights (verify.json).
    Verify,
    /// Scan all index pairs (gram.csv) and report their decay (decay.json, decay.svg).
    Gram,
    /// Analyse a sampled signal and reconstruct it (coefficients.csv, reconstruction.json).
    Frame {
        /// Signal in the binary field format, optionally with a `.json` sidecar.
        #[arg(long)]
        signal: PathBuf,
    },
    /// Recompute decay.json and decay.svg from an existing gram.csv.
    DecayReport {
        /// Defaults to gram.csv in the output directory.
        #[arg(long)]
        gram: Option<PathBuf>,
    },
}

/// Whether an error stems from the configuration or input (exit 2) or from a
/// computation that failed a check (exit 1).
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use wavepacket::Error as E;
    for cause in err.chain() {
        if cause.downcast_ref::<commands::InputError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Quadrature(_) | E::Partition(_) | E::Stagnation { .. } | E::BoundaryDecay { .. } => 1,
                _ => 2,
            };
        }
    }
    2
}

/// Resolves the configuration and runs the command on its own thread pool.
pub fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let config = RunConfig::resolve(&cli.overrides).map_err(commands::InputError)?;
    config.install(|| match &cli.command {
        Command::Gen => commands::gen(&config),
        Command::Verify => commands::verify(&config),
        Command::Gram => commands::gram(&config),
        Command::Frame { signal } => commands::frame(&config, signal),
        Command::DecayReport { gram } => commands::decay_report_cmd(&config, gram.clone()),
    })?
}

/// Process exit status for a finished run.
pub fn status(result: &anyhow::Result<Outcome>) -> u8 {
    match result {
        Ok(Outcome::Passed) => 0,
        Ok(Outcome::ChecksFailed) => 1,
        Err(e) => exit_code(e),
    }
}
