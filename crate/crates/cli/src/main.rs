use std::process::ExitCode;

use clap::Parser;
use qarb_cli::{execute, Cli};

fn main() -> ExitCode {
    match execute(Cli::parse(), &mut std::io::stdout().lock()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
