// SPDX-License-Identifier: Apache-2.0

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => commands::run(a),
        Command::Audit(a) => commands::audit(a),
        Command::Rates(a) => commands::rates(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::DemoInfeasible(a) => commands::demo_infeasible(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("dsa: one or more checks failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("dsa: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
