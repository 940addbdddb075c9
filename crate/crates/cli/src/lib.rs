//! Front end for the `recwalk` binary: argument types, run manifests and
//! artifact writers.

pub mod args;
mod commands;
pub mod manifest;
pub mod output;

use anyhow::{Context, Result};
use serde_json::json;

use crate::args::{Cli, Command};
use crate::manifest::RunManifest;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VERIFICATION_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
}

/// Runs one command and writes its artifact. Returns the exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    if let Some(threads) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let global = &cli.global;
    let output = match &cli.command {
        Command::Table(a) => commands::table(global, a)?,
        Command::Spectrum(a) => commands::spectrum(global, a)?,
        Command::Mix(a) => commands::mix(global, a)?,
        Command::Bounds(a) => commands::bounds(global, a)?,
        Command::Verify(a) => commands::verify(global, a)?,
        Command::Simulate(a) => commands::simulate(global, a)?,
    };
    let params = json!({
        "global": global,
        "args": cli.command,
        "sequences": output.sequences,
    });
    let manifest = RunManifest::new(cli.command.name(), params, &output.sequences)?;
    let format = global
        .format
        .unwrap_or_else(|| cli.command.default_format());
    output::write_artifact(&output.artifact, &manifest, format, global.out.as_deref())?;
    Ok(if output.verification_failed {
        exit::VERIFICATION_FAILED
    } else {
        exit::SUCCESS
    })
}
