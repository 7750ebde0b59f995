// SPDX-License-Identifier: Apache-2.0

use std::process::ExitCode;

use clap::Parser;
use wavepacket_cli::{run, status, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli);
    if let Err(e) = &result {
        eprintln!("error: {e:#}");
    }
    ExitCode::from(status(&result))
}
