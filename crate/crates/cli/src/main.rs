use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    match velopad_cli::run(velopad_cli::Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
