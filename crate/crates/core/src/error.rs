use thiserror::Error;

use crate::geometry::SymbolClass;

pub type Result<T> = std::result::Result<T, ProcaError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcaError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("kmax {kmax} is not below the Nyquist mode {nyquist}")]
    Nyquist { kmax: usize, nyquist: usize },

    #[error("screened-Poisson problem with zero mass has a right-hand side of nonzero mean {mean:e}")]
    Solvability { mean: f64 },

    #[error("elliptic solve did not converge after {iterations} iterations (relative residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("lambda = {lambda} gives a non-hyperbolic principal symbol ({class})")]
    NotHyperbolic { lambda: f64, class: SymbolClass },

    #[error("unsupported limit: {0}")]
    UnsupportedLimit(String),

    #[error("time step {dt:e} exceeds the CFL limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("non-finite values detected at t = {t}")]
    Divergence { t: f64 },

    #[error("stored time levels are not uniformly spaced: {0}")]
    LevelSpacing(String),

    #[error("frequency measurement failed: {0}")]
    Measurement(String),

    #[error("wave vector component {k} along axis {axis} is not commensurate with box length {length}")]
    Incommensurate { axis: usize, k: f64, length: f64 },

    #[error("snapshot format error: {0}")]
    Snapshot(String),
}
