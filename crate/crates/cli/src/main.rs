use std::process::ExitCode;

use clap::Parser;

use recwalk_cli::args::Cli;
use recwalk_cli::{exit, run};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit::USAGE
        }
    };
    ExitCode::from(code as u8)
}
