//! Optical (Gordon) metric, the mass-metric family, and the static curvature
//! of the optical metric.
//!
//! The background is Minkowski `g = diag(-1, 1, 1, 1)` in Cartesian
//! coordinates and the medium is at rest, `u = (1, 0, 0, 0)`. The optical
//! metric is then `gamma^{ab} = g^{ab} + (1 - n^2) u^a u^b`, with forward
//! components `gamma_{00} = -1/n^2`, `gamma_{ij} = delta_{ij}`.

use std::fmt;

use crate::error::{ProcaError, Result};
use crate::grid::{GridSpec, ScalarField};

/// Inverse Minkowski metric, diagonal entries.
pub const MINKOWSKI: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

/// Four-velocity of the medium.
pub const MEDIUM_VELOCITY: [f64; 4] = [1.0, 0.0, 0.0, 0.0];

#[derive(Debug, Clone, PartialEq)]
pub enum RefractiveIndex {
    Constant(f64),
    Field(ScalarField),
}

impl RefractiveIndex {
    pub fn is_constant(&self) -> bool {
        matches!(self, RefractiveIndex::Constant(_))
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            RefractiveIndex::Constant(n) => Some(*n),
            RefractiveIndex::Field(_) => None,
        }
    }

    pub fn min(&self) -> f64 {
        match self {
            RefractiveIndex::Constant(n) => *n,
            RefractiveIndex::Field(f) => f.min(),
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            RefractiveIndex::Constant(n) => *n,
            RefractiveIndex::Field(f) => f.max(),
        }
    }

    pub fn to_field(&self, grid: &GridSpec) -> ScalarField {
        match self {
            RefractiveIndex::Constant(n) => ScalarField::constant(grid, *n),
            RefractiveIndex::Field(f) => f.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            RefractiveIndex::Constant(n) => n.is_finite() && *n > 0.0,
            RefractiveIndex::Field(f) => f.is_finite() && f.min() > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(ProcaError::Domain(format!(
                "refractive index must be positive and finite (min {})",
                self.min()
            )))
        }
    }
}

/// Material and field parameters: refractive index, mass-metric parameter
/// lambda and Proca mass, in units with hbar = c = 1. The medium is
/// non-magnetic and at rest.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumSpec {
    n: RefractiveIndex,
    lambda: f64,
    mu_p: f64,
}

impl MediumSpec {
    pub fn new(n: RefractiveIndex, lambda: f64, mu_p: f64) -> Result<Self> {
        n.validate()?;
        if !lambda.is_finite() {
            return Err(ProcaError::Domain(format!("lambda must be finite, got {lambda}")));
        }
        if !(mu_p.is_finite() && mu_p >= 0.0) {
            return Err(ProcaError::Domain(format!(
                "Proca mass must be non-negative, got {mu_p}"
            )));
        }
        Ok(MediumSpec { n, lambda, mu_p })
    }

    pub fn constant(n: f64, lambda: f64, mu_p: f64) -> Result<Self> {
        MediumSpec::new(RefractiveIndex::Constant(n), lambda, mu_p)
    }

    /// Medium whose mass metric coincides with the optical metric,
    /// `lambda = 1 - n^2` (only meaningful for constant `n`).
    pub fn gordon(n: RefractiveIndex, mu_p: f64) -> Result<Self> {
        let lambda = n.constant_value().map_or(0.0, |n| 1.0 - n * n);
        MediumSpec::new(n, lambda, mu_p)
    }

    pub fn n(&self) -> &RefractiveIndex {
        &self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu_p(&self) -> f64 {
        self.mu_p
    }

    pub fn four_velocity(&self) -> [f64; 4] {
        MEDIUM_VELOCITY
    }
}

/// A metric component: either uniform or sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    Field(ScalarField),
}

impl Coefficient {
    pub fn at(&self, idx: usize) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Field(f) => f[idx],
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Coefficient::Constant(c) => Some(*c),
            Coefficient::Field(_) => None,
        }
    }

    pub fn to_field(&self, grid: &GridSpec) -> ScalarField {
        match self {
            Coefficient::Constant(c) => ScalarField::constant(grid, *c),
            Coefficient::Field(f) => f.clone(),
        }
    }
}

type Matrix4 = [[f64; 4]; 4];

/// Inverse and forward components of a symmetric rank-2 tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricComponents {
    pub inv: [[Coefficient; 4]; 4],
    /// `None` when the inverse components are degenerate.
    pub fwd: Option<[[Coefficient; 4]; 4]>,
    /// Determinant of the forward components (zero when degenerate).
    pub det: Coefficient,
}

impl MetricComponents {
    fn from_pointwise(samples: Vec<Matrix4>, grid: Option<&GridSpec>) -> Self {
        let inverted: Vec<Option<(Matrix4, f64)>> = samples.iter().map(invert4).collect();
        let degenerate = inverted.iter().any(Option::is_none);
        let collect = |f: &dyn Fn(usize) -> f64| -> Coefficient {
            let first = f(0);
            if samples.len() == 1 || (0..samples.len()).all(|i| f(i) == first) {
                Coefficient::Constant(first)
            } else {
                let grid = grid.expect("sampled components need a grid");
                Coefficient::Field(
                    ScalarField::from_values(grid, (0..samples.len()).map(f).collect())
                        .expect("one sample per grid point"),
                )
            }
        };
        let inv = std::array::from_fn(|a| std::array::from_fn(|b| collect(&|i| samples[i][a][b])));
        if degenerate {
            return MetricComponents {
                inv,
                fwd: None,
                det: Coefficient::Constant(0.0),
            };
        }
        let fwd = std::array::from_fn(|a| {
            std::array::from_fn(|b| collect(&|i| inverted[i].as_ref().unwrap().0[a][b]))
        });
        // det of the forward components is the reciprocal of det of the inverse ones
        let det = collect(&|i| 1.0 / inverted[i].as_ref().unwrap().1);
        MetricComponents {
            inv,
            fwd: Some(fwd),
            det,
        }
    }

    /// Max over the grid of `|X^{am} X_{mb} - delta^a_b|`.
    pub fn identity_defect(&self, points: usize) -> f64 {
        let Some(fwd) = &self.fwd else {
            return f64::INFINITY;
        };
        let mut worst: f64 = 0.0;
        for idx in 0..points {
            for a in 0..4 {
                for b in 0..4 {
                    let s: f64 = (0..4).map(|m| self.inv[a][m].at(idx) * fwd[m][b].at(idx)).sum();
                    let delta = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((s - delta).abs());
                }
            }
        }
        worst
    }
}

/// Gauss-Jordan inverse with partial pivoting; also returns the determinant.
fn invert4(m: &Matrix4) -> Option<(Matrix4, f64)> {
    let mut a = *m;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut det = 1.0;
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            a.swap(pivot, col);
            inv.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for k in 0..4 {
            a[col][k] /= p;
            inv[col][k] /= p;
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for k in 0..4 {
                        a[r][k] -= f * a[col][k];
                        inv[r][k] -= f * inv[col][k];
                    }
                }
            }
        }
    }
    Some((inv, det))
}

fn deformed_minkowski(coupling: f64, u: [f64; 4]) -> Matrix4 {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let g = if a == b { MINKOWSKI[a] } else { 0.0 };
            g + coupling * u[a] * u[b]
        })
    })
}

/// Optical metric `gamma^{ab} = g^{ab} + (1 - n^2) u^a u^b` with its forward
/// components and determinant.
pub fn gordon_metric(medium: &MediumSpec) -> Result<MetricComponents> {
    medium.n.validate()?;
    let u = medium.four_velocity();
    Ok(match &medium.n {
        RefractiveIndex::Constant(n) => {
            MetricComponents::from_pointwise(vec![deformed_minkowski(1.0 - n * n, u)], None)
        }
        RefractiveIndex::Field(f) => MetricComponents::from_pointwise(
            f.values()
                .iter()
                .map(|n| deformed_minkowski(1.0 - n * n, u))
                .collect(),
            Some(f.grid()),
        ),
    })
}

/// Mass metric `m^{ab} = g^{ab} + lambda u^a u^b`.
pub fn mass_metric(medium: &MediumSpec) -> MetricComponents {
    MetricComponents::from_pointwise(
        vec![deformed_minkowski(medium.lambda, medium.four_velocity())],
        None,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Hyperbolic,
    Elliptic3d,
    Elliptic4d,
}

/// Type of the principal symbol of `(lambda - 1) d_t^2 + Laplacian`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolClass {
    pub kind: SymbolKind,
    /// Characteristic speed, present only in the hyperbolic case.
    pub speed: Option<f64>,
}

impl fmt::Display for SymbolClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.speed) {
            (SymbolKind::Hyperbolic, Some(c)) => write!(f, "hyperbolic, speed {c}"),
            (SymbolKind::Hyperbolic, None) => write!(f, "hyperbolic"),
            (SymbolKind::Elliptic3d, _) => write!(f, "elliptic-3d"),
            (SymbolKind::Elliptic4d, _) => write!(f, "elliptic-4d"),
        }
    }
}

pub fn classify_symbol(lambda: f64) -> SymbolClass {
    if lambda < 1.0 {
        SymbolClass {
            kind: SymbolKind::Hyperbolic,
            speed: Some(1.0 / (1.0 - lambda).sqrt()),
        }
    } else if lambda == 1.0 {
        SymbolClass {
            kind: SymbolKind::Elliptic3d,
            speed: None,
        }
    } else {
        SymbolClass {
            kind: SymbolKind::Elliptic4d,
            speed: None,
        }
    }
}

/// Christoffel symbols `Gamma^a_{bc}` of the static optical metric. Only
/// nonzero components are stored; lookups are symmetric in the lower pair.
#[derive(Debug, Clone)]
pub struct ChristoffelField {
    grid: GridSpec,
    components: [[[Option<ScalarField>; 4]; 4]; 4],
}

impl ChristoffelField {
    fn empty(grid: &GridSpec) -> Self {
        ChristoffelField {
            grid: *grid,
            components: Default::default(),
        }
    }

    fn set(&mut self, a: usize, b: usize, c: usize, f: ScalarField) {
        self.components[a][c][b] = Some(f.clone());
        self.components[a][b][c] = Some(f);
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> Option<&ScalarField> {
        self.components[a][b][c].as_ref()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().flatten().flatten().all(Option::is_none)
    }
}

/// Static curvature of the optical metric.
#[derive(Debug, Clone)]
pub struct RicciField {
    components: [[Option<ScalarField>; 4]; 4],
    asymmetry: f64,
}

impl RicciField {
    pub fn get(&self, a: usize, b: usize) -> Option<&ScalarField> {
        self.components[a][b].as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().flatten().all(Option::is_none)
    }

    /// Max-norm of the antisymmetric part before symmetrization.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }
}

/// Closed-form Christoffels of `gamma = diag(-1/n^2, 1, 1, 1)`:
/// `Gamma^0_{0i} = -d_i n / n` and `Gamma^i_{00} = -d_i n / n^3`, with the
/// gradient of `n` taken with the grid stencils.
pub fn christoffels_static(medium: &MediumSpec, grid: &GridSpec) -> Result<ChristoffelField> {
    medium.n.validate()?;
    let mut out = ChristoffelField::empty(grid);
    let RefractiveIndex::Field(n) = &medium.n else {
        return Ok(out);
    };
    if n.grid() != grid {
        return Err(ProcaError::Grid(
            "refractive index sampled on a different grid".into(),
        ));
    }
    for i in 0..grid.dim() {
        let dn = n.partial(i);
        let g0 = dn.zip_map(n, |d, n| -d / n);
        let gi = dn.zip_map(n, |d, n| -d / (n * n * n));
        out.set(0, 0, i + 1, g0);
        out.set(i + 1, 0, 0, gi);
    }
    Ok(out)
}

fn accumulate(slot: &mut Option<ScalarField>, a: f64, f: &ScalarField) {
    match slot {
        Some(s) => s.axpy(a, f),
        None => *slot = Some(f * a),
    }
}

fn spatial_partial(f: &ScalarField, axis: usize) -> Option<ScalarField> {
    // axis 0 is time; static fields have no time derivative
    if axis == 0 {
        None
    } else {
        Some(f.partial(axis - 1))
    }
}

/// `R_{bc} = d_a G^a_{bc} - d_c G^a_{ba} + G^a_{ad} G^d_{bc} - G^a_{cd} G^d_{ba}`
/// with time derivatives dropped and the Christoffel derivatives taken by
/// finite differences. The output is symmetrized.
pub fn ricci_static(chris: &ChristoffelField, grid: &GridSpec) -> RicciField {
    let mut raw: [[Option<ScalarField>; 4]; 4] = Default::default();
    let g = |a, b, c| chris.get(a, b, c);
    for b in 0..4 {
        for c in 0..4 {
            let slot = &mut raw[b][c];
            for a in 0..4 {
                if let Some(d) = g(a, b, c).and_then(|f| spatial_partial(f, a)) {
                    accumulate(slot, 1.0, &d);
                }
                if let Some(d) = g(a, b, a).and_then(|f| spatial_partial(f, c)) {
                    accumulate(slot, -1.0, &d);
                }
                for d in 0..4 {
                    if let (Some(x), Some(y)) = (g(a, a, d), g(d, b, c)) {
                        accumulate(slot, 1.0, &x.hadamard(y));
                    }
                    if let (Some(x), Some(y)) = (g(a, c, d), g(d, b, a)) {
                        accumulate(slot, -1.0, &x.hadamard(y));
                    }
                }
            }
        }
    }
    debug_assert_eq!(chris.grid(), grid);
    let mut asymmetry: f64 = 0.0;
    let mut components: [[Option<ScalarField>; 4]; 4] = Default::default();
    for b in 0..4 {
        for c in b..4 {
            let sym = match (&raw[b][c], &raw[c][b]) {
                (None, None) => None,
                (Some(x), None) | (None, Some(x)) => {
                    asymmetry = asymmetry.max(0.5 * x.norm_linf());
                    Some(x * 0.5)
                }
                (Some(x), Some(y)) => {
                    asymmetry = asymmetry.max(0.5 * (x - y).norm_linf());
                    Some(&(x + y) * 0.5)
                }
            };
            components[c][b] = sym.clone();
            components[b][c] = sym;
        }
    }
    RicciField {
        components,
        asymmetry,
    }
}

/// Christoffels and Ricci tensor of the optical metric on one grid, built once
/// and shared read-only by the Gordon engine.
#[derive(Debug, Clone)]
pub struct GeometryBundle {
    pub n: ScalarField,
    pub gamma: MetricComponents,
    pub mass: MetricComponents,
    pub christoffel: ChristoffelField,
    pub ricci: RicciField,
}

impl GeometryBundle {
    pub fn build(medium: &MediumSpec, grid: &GridSpec) -> Result<Self> {
        let christoffel = christoffels_static(medium, grid)?;
        let ricci = ricci_static(&christoffel, grid);
        Ok(GeometryBundle {
            n: medium.n.to_field(grid),
            gamma: gordon_metric(medium)?,
            mass: mass_metric(medium),
            christoffel,
            ricci,
        })
    }
}
