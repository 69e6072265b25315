use std::io;

use proca_core::ProcaError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ProcaError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    /// 0 success, 1 i/o, 2 configuration or validation, 3 CFL violation,
    /// 4 elliptic non-convergence, 5 divergence during evolution.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                ProcaError::Cfl { .. } => 3,
                ProcaError::NonConvergence { .. } => 4,
                ProcaError::Divergence { .. } => 5,
                _ => 2,
            },
        }
    }
}
