//! Command-line front end: simulation, estimation and Fisher-information
//! sweeps with CSV/JSON outputs and run manifests.

pub mod axis;
pub mod cli;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;
pub mod spectrum_file;

pub use error::{CliError, CliResult};

/// Version of every JSON and CSV layout written by this crate.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable capping the number of parallel sweep workers.
pub const THREADS_ENV: &str = "QWKT_THREADS";

pub fn run(cli: cli::Cli) -> CliResult<()> {
    match cli.command {
        cli::Command::Simulate(a) => commands::simulate::run(&a),
        cli::Command::Estimate(a) => commands::estimate::run(&a),
        cli::Command::Fisher(a) => commands::fisher::run(&a, false),
        cli::Command::Sweep(a) => commands::fisher::run(&a, true),
        cli::Command::WktDemo(a) => commands::wkt::run(&a),
    }
}
