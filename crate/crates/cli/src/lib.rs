//! Command-line harness: configuration files, single runs, convergence
//! ladders and field snapshots.

pub mod config;
pub mod converge;
pub mod error;
pub mod run;
pub mod snapshot;

pub use config::RunConfig;
pub use converge::{converge, ConvergenceTable};
pub use error::CliError;
pub use run::{run, RunSummary};

/// Environment variable holding the worker-thread count for ladders.
pub const WORKERS_ENV: &str = "PROCA_WORKERS";

pub fn workers_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}
