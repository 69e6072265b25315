//! Periodic Cartesian grids, centered finite-difference stencils and grid
//! functions.
//!
//! Fields are stored flat with the x index running fastest. Axes beyond the
//! grid dimension carry a single point, so every field is formally
//! three-dimensional and derivatives along inactive axes vanish.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::error::{ProcaError, Result};
use crate::spectral;

/// Minimum number of points along each active axis.
pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StencilOrder {
    Second,
    Fourth,
}

impl StencilOrder {
    pub fn from_int(order: usize) -> Option<Self> {
        match order {
            2 => Some(StencilOrder::Second),
            4 => Some(StencilOrder::Fourth),
            _ => None,
        }
    }

    pub fn as_int(self) -> usize {
        match self {
            StencilOrder::Second => 2,
            StencilOrder::Fourth => 4,
        }
    }

    fn first_derivative_taps(self) -> &'static [(isize, f64)] {
        match self {
            StencilOrder::Second => &[(-1, -0.5), (1, 0.5)],
            StencilOrder::Fourth => &[
                (-2, 1.0 / 12.0),
                (-1, -8.0 / 12.0),
                (1, 8.0 / 12.0),
                (2, -1.0 / 12.0),
            ],
        }
    }

    fn second_derivative_taps(self) -> &'static [(isize, f64)] {
        match self {
            StencilOrder::Second => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
            StencilOrder::Fourth => &[
                (-2, -1.0 / 12.0),
                (-1, 16.0 / 12.0),
                (0, -30.0 / 12.0),
                (1, 16.0 / 12.0),
                (2, -1.0 / 12.0),
            ],
        }
    }
}

/// Uniform periodic grid of dimension 1 to 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    points: [usize; 3],
    lengths: [f64; 3],
    order: StencilOrder,
}

impl GridSpec {
    pub fn new(points: &[usize], lengths: &[f64], order: StencilOrder) -> Result<Self> {
        let dim = points.len();
        if !(1..=3).contains(&dim) {
            return Err(ProcaError::Grid(format!("dimension {dim} not in 1..=3")));
        }
        if lengths.len() != dim {
            return Err(ProcaError::Grid(format!(
                "{} box lengths given for a {dim}-dimensional grid",
                lengths.len()
            )));
        }
        let mut p = [1usize; 3];
        let mut l = [1.0f64; 3];
        for axis in 0..dim {
            if points[axis] < MIN_POINTS {
                return Err(ProcaError::Grid(format!(
                    "axis {axis} has {} points, need at least {MIN_POINTS}",
                    points[axis]
                )));
            }
            if !(lengths[axis].is_finite() && lengths[axis] > 0.0) {
                return Err(ProcaError::Grid(format!(
                    "axis {axis} has non-positive length {}",
                    lengths[axis]
                )));
            }
            p[axis] = points[axis];
            l[axis] = lengths[axis];
        }
        Ok(GridSpec {
            dim,
            points: p,
            lengths: l,
            order,
        })
    }

    /// Same number of points and box length along every axis.
    pub fn uniform(dim: usize, points: usize, length: f64, order: StencilOrder) -> Result<Self> {
        GridSpec::new(&vec![points; dim], &vec![length; dim], order)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[usize] {
        &self.points[..self.dim]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths[..self.dim]
    }

    pub fn order(&self) -> StencilOrder {
        self.order
    }

    /// Copy of this grid with a different stencil order.
    pub fn with_order(mut self, order: StencilOrder) -> Self {
        self.order = order;
        self
    }

    /// Copy with the point count along every active axis multiplied by `factor`.
    pub fn refined(mut self, factor: usize) -> Self {
        for axis in 0..self.dim {
            self.points[axis] *= factor;
        }
        self
    }

    pub(crate) fn shape(&self) -> [usize; 3] {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.points[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Product of the spacings over the active axes.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    pub(crate) fn stride(&self, axis: usize) -> usize {
        self.points[..axis].iter().product()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.points[0] * (j + self.points[1] * k)
    }

    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.points[0];
        let j = (idx / self.points[0]) % self.points[1];
        let k = idx / (self.points[0] * self.points[1]);
        [i, j, k]
    }

    /// Physical coordinates of a flat index; inactive axes read 0.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = m[axis] as f64 * self.spacing(axis);
        }
        x
    }

    /// Signed Fourier mode number of grid index `i` along `axis`.
    pub fn mode_number(&self, axis: usize, i: usize) -> isize {
        let n = self.points[axis];
        if i <= n / 2 {
            i as isize
        } else {
            i as isize - n as isize
        }
    }

    /// Fourier symbol of the centered first-derivative stencil, divided by `i`.
    pub fn first_derivative_symbol(&self, axis: usize, mode: isize) -> f64 {
        if axis >= self.dim {
            return 0.0;
        }
        let h = self.spacing(axis);
        let theta = 2.0 * std::f64::consts::PI * mode as f64 / self.points[axis] as f64;
        match self.order {
            StencilOrder::Second => theta.sin() / h,
            StencilOrder::Fourth => (8.0 * theta.sin() - (2.0 * theta).sin()) / (6.0 * h),
        }
    }

    /// Positive symbol `s(k)` of minus the compact second-difference stencil.
    pub fn second_derivative_symbol(&self, axis: usize, mode: isize) -> f64 {
        if axis >= self.dim {
            return 0.0;
        }
        let h = self.spacing(axis);
        let theta = 2.0 * std::f64::consts::PI * mode as f64 / self.points[axis] as f64;
        match self.order {
            StencilOrder::Second => (2.0 - 2.0 * theta.cos()) / (h * h),
            StencilOrder::Fourth => {
                (30.0 - 32.0 * theta.cos() + 2.0 * (2.0 * theta).cos()) / (12.0 * h * h)
            }
        }
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim {
            return Err(ProcaError::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        Ok(())
    }
}

/// Real grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &GridSpec) -> Self {
        ScalarField {
            grid: *grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &GridSpec, value: f64) -> Self {
        ScalarField {
            grid: *grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|idx| f(grid.coords(idx))).collect();
        ScalarField {
            grid: *grid,
            values,
        }
    }

    pub fn from_values(grid: &GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(ProcaError::Grid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField {
            grid: *grid,
            values,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        debug_assert_eq!(self.grid, other.grid);
        ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &ScalarField) {
        debug_assert_eq!(self.grid, other.grid);
        for (v, w) in self.values.iter_mut().zip(&other.values) {
            *v += a * w;
        }
    }

    /// Pointwise product.
    pub fn hadamard(&self, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Grid-weighted discrete L2 norm, `sqrt(sum f^2 * h^dim)`.
    pub fn norm_l2(&self) -> f64 {
        norm_l2(self)
    }

    pub fn norm_linf(&self) -> f64 {
        norm_linf(self)
    }

    /// Grid-weighted inner product.
    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    pub fn derivative(&self, axis: usize) -> Result<ScalarField> {
        derivative(self, axis)
    }

    pub fn second_derivative(&self, axis: usize) -> Result<ScalarField> {
        self.grid.check_axis(axis)?;
        let h = self.grid.spacing(axis);
        Ok(self.apply_taps(axis, self.grid.order.second_derivative_taps(), 1.0 / (h * h)))
    }

    pub fn laplacian(&self) -> ScalarField {
        laplacian(self)
    }

    /// First derivative along `axis`, or zero for an inactive axis.
    pub(crate) fn partial(&self, axis: usize) -> ScalarField {
        if axis >= self.grid.dim {
            ScalarField::zeros(&self.grid)
        } else {
            let h = self.grid.spacing(axis);
            self.apply_taps(axis, self.grid.order.first_derivative_taps(), 1.0 / h)
        }
    }

    fn apply_taps(&self, axis: usize, taps: &[(isize, f64)], scale: f64) -> ScalarField {
        let n = self.grid.points[axis];
        let stride = self.grid.stride(axis);
        let block = n * stride;
        let wrap = |c: usize, offset: isize| (c as isize + offset).rem_euclid(n as isize) as usize;
        let reach = taps.iter().map(|&(o, _)| o.unsigned_abs()).max().unwrap_or(0);
        let mut out = vec![0.0; self.values.len()];
        for (src, dst) in self.values.chunks_exact(block).zip(out.chunks_exact_mut(block)) {
            if stride == 1 {
                for (c, o) in dst.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    if c >= reach && c + reach < n {
                        for &(offset, weight) in taps {
                            acc += weight * src[(c as isize + offset) as usize];
                        }
                    } else {
                        for &(offset, weight) in taps {
                            acc += weight * src[wrap(c, offset)];
                        }
                    }
                    *o = acc * scale;
                }
            } else {
                for (c, line) in dst.chunks_exact_mut(stride).enumerate() {
                    for &(offset, weight) in taps {
                        let j = wrap(c, offset);
                        for (o, v) in line.iter_mut().zip(&src[j * stride..(j + 1) * stride]) {
                            *o += weight * v;
                        }
                    }
                    for o in line.iter_mut() {
                        *o *= scale;
                    }
                }
            }
        }
        ScalarField {
            grid: self.grid,
            values: out,
        }
    }
}

impl Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, idx: usize) -> &f64 {
        &self.values[idx]
    }
}

impl IndexMut<usize> for ScalarField {
    fn index_mut(&mut self, idx: usize) -> &mut f64 {
        &mut self.values[idx]
    }
}

impl Add<&ScalarField> for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub<&ScalarField> for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<&ScalarField> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        self.hadamard(rhs)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.map(|a| a * rhs)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|a| -a)
    }
}

impl Neg for ScalarField {
    type Output = ScalarField;
    fn neg(mut self) -> ScalarField {
        self.values.iter_mut().for_each(|v| *v = -*v);
        self
    }
}

impl AddAssign<&ScalarField> for ScalarField {
    fn add_assign(&mut self, rhs: &ScalarField) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&ScalarField> for ScalarField {
    fn sub_assign(&mut self, rhs: &ScalarField) {
        self.axpy(-1.0, rhs);
    }
}

/// Four covariant components indexed 0..3 (time first).
#[derive(Debug, Clone, PartialEq)]
pub struct CovectorField {
    pub components: [ScalarField; 4],
}

impl CovectorField {
    pub fn zeros(grid: &GridSpec) -> Self {
        CovectorField {
            components: std::array::from_fn(|_| ScalarField::zeros(grid)),
        }
    }

    pub fn new(components: [ScalarField; 4]) -> Self {
        CovectorField { components }
    }

    pub fn grid(&self) -> &GridSpec {
        self.components[0].grid()
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(ScalarField::is_finite)
    }

    /// Root-sum-square of the spatial component L2 norms.
    pub fn spatial_norm_l2(&self) -> f64 {
        self.components[1..]
            .iter()
            .map(|c| c.norm_l2().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn axpy(&mut self, a: f64, other: &CovectorField) {
        for (c, o) in self.components.iter_mut().zip(&other.components) {
            c.axpy(a, o);
        }
    }
}

impl Index<usize> for CovectorField {
    type Output = ScalarField;
    fn index(&self, mu: usize) -> &ScalarField {
        &self.components[mu]
    }
}

impl IndexMut<usize> for CovectorField {
    fn index_mut(&mut self, mu: usize) -> &mut ScalarField {
        &mut self.components[mu]
    }
}

/// Centered periodic first derivative along `axis`.
pub fn derivative(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    f.grid.check_axis(axis)?;
    Ok(f.partial(axis))
}

/// Sum of compact second differences over the active axes.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let grid = f.grid;
    let mut out = ScalarField::zeros(&grid);
    for axis in 0..grid.dim {
        let h = grid.spacing(axis);
        let d2 = f.apply_taps(axis, grid.order.second_derivative_taps(), 1.0 / (h * h));
        out += &d2;
    }
    out
}

/// Discrete divergence `sum_i D_i v_i` over the active axes.
pub fn divergence(v: &[ScalarField; 3]) -> ScalarField {
    let grid = *v[0].grid();
    let mut out = ScalarField::zeros(&grid);
    for axis in 0..grid.dim {
        out += &v[axis].partial(axis);
    }
    out
}

pub fn norm_l2(f: &ScalarField) -> f64 {
    (f.values.iter().map(|v| v * v).sum::<f64>() * f.grid.cell_volume()).sqrt()
}

pub fn norm_linf(f: &ScalarField) -> f64 {
    f.values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Deterministic zero-mean random field whose discrete Fourier support is
/// confined to integer mode vectors with `|m| <= kmax`, scaled to unit max-norm.
pub fn random_bandlimited(seed: u64, kmax: usize, grid: &GridSpec) -> Result<ScalarField> {
    let nyquist = grid.points().iter().map(|n| n / 2).min().unwrap_or(0);
    if kmax >= nyquist {
        return Err(ProcaError::Nyquist { kmax, nyquist });
    }
    if kmax == 0 {
        return Ok(ScalarField::zeros(grid));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax2 = (kmax * kmax) as isize;
    let mut spectrum = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (idx, s) in spectrum.iter_mut().enumerate() {
        let m = grid.multi_index(idx);
        let k2: isize = (0..grid.dim())
            .map(|a| grid.mode_number(a, m[a]).pow(2))
            .sum();
        if k2 == 0 || k2 > kmax2 {
            continue;
        }
        let re: f64 = rng.random_range(-1.0..1.0);
        let im: f64 = rng.random_range(-1.0..1.0);
        *s = Complex64::new(re, im);
    }
    let values = spectral::inverse_real(spectrum, grid);
    let mut field = ScalarField::from_values(grid, values)?;
    // Remove the rounding-level mean left by the transform.
    let mean = field.mean();
    field.values.iter_mut().for_each(|v| *v -= mean);
    let scale = field.norm_linf();
    if scale > 0.0 {
        field.values.iter_mut().for_each(|v| *v /= scale);
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line(n: usize, order: StencilOrder) -> GridSpec {
        GridSpec::uniform(1, n, 2.0 * PI, order).unwrap()
    }

    #[test]
    fn rejects_small_or_bad_grids() {
        assert!(GridSpec::uniform(1, 4, 1.0, StencilOrder::Second).is_err());
        assert!(GridSpec::uniform(4, 16, 1.0, StencilOrder::Second).is_err());
        assert!(GridSpec::new(&[16], &[-1.0], StencilOrder::Second).is_err());
        assert!(GridSpec::new(&[16, 16], &[1.0], StencilOrder::Second).is_err());
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        for order in [StencilOrder::Second, StencilOrder::Fourth] {
            let f = ScalarField::constant(&line(32, order), 5.0);
            assert!(f.derivative(0).unwrap().norm_linf() < 1e-12);
            assert!(f.laplacian().norm_linf() < 1e-10);
        }
    }

    #[test]
    fn derivative_axis_out_of_range() {
        let f = ScalarField::zeros(&line(16, StencilOrder::Second));
        assert_eq!(
            f.derivative(1),
            Err(ProcaError::AxisOutOfRange { axis: 1, dim: 1 })
        );
    }

    #[test]
    fn second_order_sine_within_taylor_bound() {
        let grid = line(64, StencilOrder::Second);
        let h = grid.spacing(0);
        let f = ScalarField::from_fn(&grid, |x| x[0].sin());
        let exact = ScalarField::from_fn(&grid, |x| x[0].cos());
        let err = (&f.derivative(0).unwrap() - &exact).norm_linf();
        assert!(err <= h * h / 6.0, "err {err} bound {}", h * h / 6.0);
    }

    #[test]
    fn fourth_order_refinement_ratio() {
        let err = |n| {
            let grid = line(n, StencilOrder::Fourth);
            let f = ScalarField::from_fn(&grid, |x| x[0].sin());
            let exact = ScalarField::from_fn(&grid, |x| x[0].cos());
            (&f.derivative(0).unwrap() - &exact).norm_linf()
        };
        let ratio = err(32) / err(64);
        assert!((ratio - 16.0).abs() <= 0.3 * 16.0, "ratio {ratio}");
    }

    #[test]
    fn laplacian_eigenfunctions() {
        let grid = line(128, StencilOrder::Second);
        let h = grid.spacing(0);
        let f = ScalarField::from_fn(&grid, |x| (2.0 * x[0]).sin());
        let exact = ScalarField::from_fn(&grid, |x| -4.0 * (2.0 * x[0]).sin());
        let err = (&f.laplacian() - &exact).norm_linf();
        // 4 * (2h)^2 / 12 leading truncation term
        assert!(err <= 16.0 * h * h / 12.0 * 1.01, "err {err}");

        let grid2 = GridSpec::uniform(2, 64, 2.0 * PI, StencilOrder::Second).unwrap();
        let h = grid2.spacing(0);
        let g = ScalarField::from_fn(&grid2, |x| x[0].sin() * x[1].sin());
        let exact = ScalarField::from_fn(&grid2, |x| -2.0 * x[0].sin() * x[1].sin());
        let err = (&g.laplacian() - &exact).norm_linf();
        assert!(err <= 2.0 * h * h / 12.0 * 1.01, "err {err}");
    }

    #[test]
    fn stencil_symbols_match_application() {
        for order in [StencilOrder::Second, StencilOrder::Fourth] {
            let grid = line(32, order);
            let m = 5;
            let f = ScalarField::from_fn(&grid, |x| (m as f64 * x[0]).sin());
            let d = f.derivative(0).unwrap();
            let expect = ScalarField::from_fn(&grid, |x| (m as f64 * x[0]).cos())
                .map(|v| v * grid.first_derivative_symbol(0, m));
            assert!((&d - &expect).norm_linf() < 1e-12);
            let l = f.laplacian();
            let expect = &f * -grid.second_derivative_symbol(0, m);
            assert!((&l - &expect).norm_linf() < 1e-11);
        }
    }

    #[test]
    fn norms_of_zero_and_sine() {
        let grid = line(256, StencilOrder::Second);
        let z = ScalarField::zeros(&grid);
        assert_eq!((z.norm_l2(), z.norm_linf()), (0.0, 0.0));
        let f = ScalarField::from_fn(&grid, |x| x[0].sin());
        assert!((f.norm_l2() - PI.sqrt()).abs() < 1e-12);
        assert!((f.norm_linf() - 1.0).abs() < 1e-3);
        let scaled = &f * -3.5;
        assert!((scaled.norm_l2() - 3.5 * f.norm_l2()).abs() < 1e-12);
        assert!((scaled.norm_linf() - 3.5 * f.norm_linf()).abs() < 1e-12);
    }

    #[test]
    fn random_field_is_deterministic_and_zero_mean() {
        let grid = GridSpec::uniform(2, 32, 1.0, StencilOrder::Second).unwrap();
        let a = random_bandlimited(7, 4, &grid).unwrap();
        let b = random_bandlimited(7, 4, &grid).unwrap();
        let c = random_bandlimited(8, 4, &grid).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.mean().abs() < 1e-12);
        assert!((a.norm_linf() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_field_rejects_nyquist() {
        let grid = line(16, StencilOrder::Second);
        assert_eq!(
            random_bandlimited(1, 8, &grid),
            Err(ProcaError::Nyquist { kmax: 8, nyquist: 8 })
        );
    }

    #[test]
    fn random_field_is_bandlimited() {
        let grid = GridSpec::uniform(2, 32, 3.0, StencilOrder::Second).unwrap();
        let f = random_bandlimited(11, 4, &grid).unwrap();
        let spec = spectral::forward_real(f.values(), &grid);
        let scale = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (idx, c) in spec.iter().enumerate() {
            let m = grid.multi_index(idx);
            let k2 = grid.mode_number(0, m[0]).pow(2) + grid.mode_number(1, m[1]).pow(2);
            if k2 > 16 {
                assert!(c.norm() < 1e-12 * scale, "mode {m:?} has {}", c.norm());
            }
        }
    }
}
