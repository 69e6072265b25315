//! Constrained Cauchy evolution of massive vector (Proca) fields in
//! dielectric media at rest.
//!
//! Two engines are provided. [`FlatEngine`] evolves a constant-index medium
//! whose mass term is contracted with `g + lambda u u`; [`GordonEngine`]
//! evolves a static, spatially varying index with the mass term contracted
//! with the optical metric. Both complete free data to constrained initial
//! data with an elliptic solve and monitor the constraints during evolution.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod convergence;
pub mod elliptic;
pub mod error;
pub mod flat;
pub mod geometry;
pub mod gordon;
pub mod grid;
pub mod integrator;
pub mod modes;
pub mod spectral;

pub use convergence::{fit_order, OrderFit};
pub use error::{ProcaError, Result};
pub use flat::{FlatEngine, FlatState, MonitorReport};
pub use geometry::{classify_symbol, MediumSpec, RefractiveIndex, SymbolClass, SymbolKind};
pub use gordon::{GordonEngine, GordonMonitorReport, GordonState};
pub use grid::{CovectorField, GridSpec, ScalarField, StencilOrder};
pub use integrator::Trajectory;
pub use modes::{DispersionMode, ModeKind};
