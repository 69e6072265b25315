//! Plane-wave oracles: continuum dispersion relations, single-mode free data
//! and frequency measurement from sampled time series.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{ProcaError, Result};
use crate::geometry::{classify_symbol, MediumSpec, SymbolKind};
use crate::grid::{GridSpec, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Transverse,
    Longitudinal,
}

impl ModeKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "transverse" => Some(ModeKind::Transverse),
            "longitudinal" => Some(ModeKind::Longitudinal),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModeKind::Transverse => "transverse",
            ModeKind::Longitudinal => "longitudinal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionMode {
    pub kind: ModeKind,
    pub k: [f64; 3],
    pub omega: f64,
    /// Unit spatial vector.
    pub polarization: [f64; 3],
}

fn constant_index(medium: &MediumSpec) -> Result<f64> {
    medium.n().constant_value().ok_or_else(|| {
        ProcaError::Domain("plane-wave dispersion needs a constant refractive index".into())
    })
}

/// `omega = sqrt(k^2 + mu^2) / n`
pub fn dispersion_transverse(k: f64, medium: &MediumSpec) -> Result<f64> {
    let n = constant_index(medium)?;
    Ok((k * k + medium.mu_p().powi(2)).sqrt() / n)
}

/// `omega = sqrt(k^2 / (1 - lambda) + mu^2 / n^2)`
pub fn dispersion_longitudinal(k: f64, medium: &MediumSpec) -> Result<f64> {
    let n = constant_index(medium)?;
    let class = classify_symbol(medium.lambda());
    if class.kind != SymbolKind::Hyperbolic {
        return Err(ProcaError::NotHyperbolic {
            lambda: medium.lambda(),
            class,
        });
    }
    Ok((k * k / (1.0 - medium.lambda()) + (medium.mu_p() / n).powi(2)).sqrt())
}

fn norm(v: [f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl DispersionMode {
    /// Mode with wavevector `k`. Transverse modes get a polarization
    /// orthogonal to `k`, built from the coordinate axis least aligned with it.
    pub fn new(kind: ModeKind, k: [f64; 3], medium: &MediumSpec) -> Result<Self> {
        let kn = norm(k);
        let omega = match kind {
            ModeKind::Transverse => dispersion_transverse(kn, medium)?,
            ModeKind::Longitudinal => dispersion_longitudinal(kn, medium)?,
        };
        let polarization = match kind {
            ModeKind::Longitudinal => {
                if kn == 0.0 {
                    return Err(ProcaError::Domain(
                        "a longitudinal mode needs a nonzero wavevector".into(),
                    ));
                }
                k.map(|c| c / kn)
            }
            ModeKind::Transverse => {
                if kn == 0.0 {
                    [0.0, 1.0, 0.0]
                } else {
                    let axis = (0..3)
                        .min_by(|&a, &b| k[a].abs().total_cmp(&k[b].abs()))
                        .expect("three axes");
                    let mut p = [0.0; 3];
                    p[axis] = 1.0;
                    let proj = k[axis] / (kn * kn);
                    for (pc, kc) in p.iter_mut().zip(k) {
                        *pc -= proj * kc;
                    }
                    let pn = norm(p);
                    p.map(|c| c / pn)
                }
            }
        };
        Ok(DispersionMode {
            kind,
            k,
            omega,
            polarization,
        })
    }

    /// Replaces the polarization of a transverse mode.
    pub fn with_polarization(mut self, p: [f64; 3]) -> Result<Self> {
        let pn = norm(p);
        let kn = norm(self.k);
        let dot: f64 = p.iter().zip(self.k).map(|(a, b)| a * b).sum();
        if self.kind != ModeKind::Transverse || pn == 0.0 || dot.abs() > 1e-12 * pn * kn.max(1.0) {
            return Err(ProcaError::Domain(
                "polarization must be a nonzero vector orthogonal to k for a transverse mode".into(),
            ));
        }
        self.polarization = p.map(|c| c / pn);
        Ok(self)
    }
}

/// Wavevector with `m[a]` whole periods across axis `a` of the box.
pub fn wavevector(grid: &GridSpec, m: [i64; 3]) -> [f64; 3] {
    std::array::from_fn(|a| {
        if a < grid.dim() {
            2.0 * PI * m[a] as f64 / grid.lengths()[a]
        } else {
            0.0
        }
    })
}

/// Travelling-wave free data `A_i = a p_i sin(k.x)`,
/// `d_t A_i = -a omega p_i cos(k.x)` at `t = 0`.
pub fn plane_wave_free_data(
    mode: &DispersionMode,
    amplitude: f64,
    grid: &GridSpec,
) -> Result<([ScalarField; 3], [ScalarField; 3])> {
    for (axis, &k) in mode.k.iter().enumerate() {
        let length = if axis < grid.dim() { grid.lengths()[axis] } else { 0.0 };
        let periods = k * length / (2.0 * PI);
        let ok = if axis < grid.dim() {
            (periods - periods.round()).abs() < 1e-9 * periods.abs().max(1.0)
        } else {
            k == 0.0
        };
        if !ok {
            return Err(ProcaError::Incommensurate { axis, k, length });
        }
    }
    let phase = ScalarField::from_fn(grid, |x| mode.k.iter().zip(x).map(|(k, x)| k * x).sum());
    let s = phase.map(f64::sin);
    let c = phase.map(f64::cos);
    let p = mode.polarization;
    let ai = std::array::from_fn(|i| &s * (amplitude * p[i]));
    let dai = std::array::from_fn(|i| &c * (-amplitude * mode.omega * p[i]));
    Ok((ai, dai))
}

const ZERO_PAD: usize = 32;

/// Dominant angular frequency of a uniformly sampled series: Hann window,
/// zero-padded FFT, quadratic interpolation of the peak.
pub fn measure_frequency(series: &[f64], dt: f64) -> Result<f64> {
    if series.len() < 8 || !(dt > 0.0) {
        return Err(ProcaError::Measurement(format!(
            "need at least 8 samples and a positive step, got {} and {dt}",
            series.len()
        )));
    }
    let len = series.len();
    let mean = series.iter().sum::<f64>() / len as f64;
    let scale = series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let spread = series.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    if !(spread > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return Err(ProcaError::Measurement("series has no oscillating content".into()));
    }
    let size = (len * ZERO_PAD).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    for (i, (b, v)) in buf.iter_mut().zip(series).enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / (len - 1) as f64).cos();
        *b = Complex64::new(w * (v - mean), 0.0);
    }
    FftPlanner::new().plan_fft_forward(size).process(&mut buf);
    let mag: Vec<f64> = buf[..size / 2].iter().map(|c| c.norm()).collect();
    let (peak, &top) = mag
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty spectrum");
    if peak + 1 >= mag.len() || !(top > 0.0) {
        return Err(ProcaError::Measurement("spectral peak at the band edge".into()));
    }
    let (a, b, c) = (mag[peak - 1], top, mag[peak + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    let omega = 2.0 * PI * (peak as f64 + shift) / (size as f64 * dt);
    let periods = omega * dt * (len - 1) as f64 / (2.0 * PI);
    if periods < 4.0 {
        return Err(ProcaError::Measurement(format!(
            "only {periods:.2} periods sampled, need at least 4"
        )));
    }
    Ok(omega)
}
