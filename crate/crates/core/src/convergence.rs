//! Least-squares convergence-order estimates over a resolution ladder.

use std::fmt;

use crate::error::{ProcaError, Result};

/// Errors at or below this magnitude are treated as exact zeros.
pub const DEFAULT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderFit {
    /// `log e = order * log h + intercept`, with the RMS of the fit residuals
    /// in log space.
    Measured {
        order: f64,
        intercept: f64,
        residual: f64,
    },
    /// At least one level sits at the floor, so no slope is defined.
    BelowFloor,
}

impl OrderFit {
    pub fn order(&self) -> Option<f64> {
        match self {
            OrderFit::Measured { order, .. } => Some(*order),
            OrderFit::BelowFloor => None,
        }
    }

    pub fn within(&self, target: f64, tolerance: f64) -> bool {
        self.order().is_some_and(|p| (p - target).abs() <= tolerance)
    }
}

impl fmt::Display for OrderFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderFit::Measured { order, residual, .. } => {
                write!(f, "{order:.3} (residual {residual:.2e})")
            }
            OrderFit::BelowFloor => write!(f, "below floor"),
        }
    }
}

/// Fits `e ~ C h^p` over the ladder. Spacings must be positive and distinct.
pub fn fit_order(spacings: &[f64], errors: &[f64], floor: f64) -> Result<OrderFit> {
    if spacings.len() != errors.len() || spacings.len() < 2 {
        return Err(ProcaError::Domain(format!(
            "need at least two matching levels, got {} spacings and {} errors",
            spacings.len(),
            errors.len()
        )));
    }
    if spacings.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(ProcaError::Domain("spacings must be positive".into()));
    }
    if errors.iter().any(|e| !e.is_finite()) {
        return Err(ProcaError::Domain("errors must be finite".into()));
    }
    if errors.iter().any(|e| e.abs() <= floor) {
        return Ok(OrderFit::BelowFloor);
    }
    let xs: Vec<f64> = spacings.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.abs().ln()).collect();
    let m = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    if sxx == 0.0 {
        return Err(ProcaError::Domain("spacings must be distinct".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let order = sxy / sxx;
    let intercept = ym - order * xm;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - order * x).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(OrderFit::Measured {
        order,
        intercept,
        residual,
    })
}
