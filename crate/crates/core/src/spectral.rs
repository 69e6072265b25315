//! Discrete Fourier transforms over the active axes of a periodic grid.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::GridSpec;

fn transform(data: &mut [Complex64], grid: &GridSpec, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let shape = grid.shape();
    for axis in 0..grid.dim() {
        let n = shape[axis];
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        if axis == 0 {
            fft.process(data);
            continue;
        }
        let stride = grid.stride(axis);
        let block = stride * n;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for start in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (i, l) in line.iter_mut().enumerate() {
                    *l = data[base + i * stride];
                }
                fft.process(&mut line);
                for (i, l) in line.iter().enumerate() {
                    data[base + i * stride] = *l;
                }
            }
        }
    }
}

/// Unnormalized forward transform of real grid values.
pub fn forward_real(values: &[f64], grid: &GridSpec) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&mut data, grid, false);
    data
}

/// Normalized inverse transform; returns the real part.
pub fn inverse_real(mut data: Vec<Complex64>, grid: &GridSpec) -> Vec<f64> {
    transform(&mut data, grid, true);
    let scale = 1.0 / grid.len() as f64;
    data.iter().map(|c| c.re * scale).collect()
}

/// Positive symbol of minus the discrete Laplacian at every grid mode.
pub fn laplacian_symbol(grid: &GridSpec) -> Vec<f64> {
    (0..grid.len())
        .map(|idx| {
            let m = grid.multi_index(idx);
            (0..grid.dim())
                .map(|a| grid.second_derivative_symbol(a, grid.mode_number(a, m[a])))
                .sum()
        })
        .collect()
}
