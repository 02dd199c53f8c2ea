use std::process::ExitCode;

use clap::Parser;
use layerwind_cli::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("layerwind: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
