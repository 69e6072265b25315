//! Evolution engine for the case where the mass term is contracted with the
//! optical metric itself, in a static medium with a smooth index `n(x)`.
//!
//! The evolved variable is `At = n A`, which satisfies the wave equation
//!
//! ```text
//! box At_v - R_{av} At^a - (D_a At_v) w^a + 2 D^a(w_[v At_a]) - mu^2 At_v = 0
//! ```
//!
//! with `w = dn / n` and all covariant derivatives, index raising and the
//! box taken with the optical metric `diag(-1/n^2, 1, 1, 1)`. Solutions
//! with constrained Cauchy data satisfy the divergence condition
//! `L = D_a At^a = 0` and the Gauss law of the original field equation.

use crate::elliptic::{apply_gauss_operator, gauss_rhs, solve_gauss_constraint, GaussOperatorProblem};
use crate::error::{ProcaError, Result};
use crate::geometry::{GeometryBundle, MediumSpec};
use crate::grid::{CovectorField, GridSpec, ScalarField};
use crate::integrator::{self, OdeState, System, Trajectory};

pub const DEFAULT_CFL: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct GordonState {
    pub atld: CovectorField,
    pub pi: CovectorField,
    pub t: f64,
}

impl GordonState {
    pub fn zeros(grid: &GridSpec) -> Self {
        GordonState {
            atld: CovectorField::zeros(grid),
            pi: CovectorField::zeros(grid),
            t: 0.0,
        }
    }

    /// The physical potential `A = At / n`.
    pub fn potential(&self, n: &ScalarField) -> CovectorField {
        CovectorField::new(std::array::from_fn(|a| {
            self.atld[a].zip_map(n, |v, n| v / n)
        }))
    }
}

impl OdeState for GordonState {
    fn time(&self) -> f64 {
        self.t
    }

    fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    fn axpy(&mut self, a: f64, other: &Self) {
        self.atld.axpy(a, &other.atld);
        self.pi.axpy(a, &other.pi);
    }

    fn is_finite(&self) -> bool {
        self.atld.is_finite() && self.pi.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GordonMonitorReport {
    pub t: f64,
    pub atld0_l2: f64,
    pub atldi_l2: f64,
    pub lorenz_l2: f64,
    pub lorenz_linf: f64,
    pub gauss_l2: f64,
    pub gauss_linf: f64,
}

impl GordonMonitorReport {
    pub const CSV_HEADER: &'static str =
        "t,atld0_l2,atldi_l2,lorenz_l2,lorenz_linf,gauss_l2,gauss_linf";

    pub fn values(&self) -> [f64; 7] {
        [
            self.t,
            self.atld0_l2,
            self.atldi_l2,
            self.lorenz_l2,
            self.lorenz_linf,
            self.gauss_l2,
            self.gauss_linf,
        ]
    }
}

/// `out += c * x * y` pointwise.
fn fma(out: &mut ScalarField, c: f64, x: &ScalarField, y: &ScalarField) {
    for ((o, a), b) in out.values_mut().iter_mut().zip(x.values()).zip(y.values()) {
        *o += c * a * b;
    }
}

#[derive(Debug, Clone)]
pub struct GordonEngine {
    grid: GridSpec,
    geometry: GeometryBundle,
    mu_p: f64,
    cfl: f64,
    /// `gamma^{00} = -n^2`
    g00: ScalarField,
    inv_n2: ScalarField,
    w: [Option<ScalarField>; 4],
    /// Coefficient of `At_a` in the equation for component `v`, collecting
    /// the curvature, `w` and mass terms.
    lin: [[Option<ScalarField>; 4]; 4],
}

impl GordonEngine {
    /// The mass-metric parameter of `medium` is not used: this engine always
    /// contracts the mass term with the optical metric.
    pub fn new(medium: &MediumSpec, grid: &GridSpec) -> Result<Self> {
        let geometry = GeometryBundle::build(medium, grid)?;
        let n = &geometry.n;
        let n2 = n.hadamard(n);
        let g00 = -&n2;
        let inv_n2 = n2.map(|v| 1.0 / v);
        let gamma_diag = |a: usize| if a == 0 { Some(&g00) } else { None };
        let chris = &geometry.christoffel;

        let mut w: [Option<ScalarField>; 4] = Default::default();
        if !medium.n().is_constant() {
            for i in 0..grid.dim() {
                w[i + 1] = Some(n.partial(i).zip_map(n, |d, n| d / n));
            }
        }

        // D_a w_b = d_a w_b - G^l_{ab} w_l, static so d_0 = 0
        let mut dw: [[Option<ScalarField>; 4]; 4] = Default::default();
        for a in 0..4 {
            for b in 0..4 {
                let mut acc: Option<ScalarField> = None;
                if a > 0 {
                    if let Some(wb) = &w[b] {
                        acc = Some(wb.partial(a - 1));
                    }
                }
                for (l, wl) in w.iter().enumerate() {
                    if let (Some(g), Some(wl)) = (chris.get(l, a, b), wl) {
                        let term = -&g.hadamard(wl);
                        acc = Some(match acc {
                            Some(x) => &x + &term,
                            None => term,
                        });
                    }
                }
                dw[a][b] = acc;
            }
        }
        let mut divw = ScalarField::zeros(grid);
        for (a, row) in dw.iter().enumerate() {
            if let Some(f) = &row[a] {
                match gamma_diag(a) {
                    Some(g) => fma(&mut divw, 1.0, g, f),
                    None => divw += f,
                }
            }
        }

        let mu2 = medium.mu_p() * medium.mu_p();
        let mut lin: [[Option<ScalarField>; 4]; 4] = Default::default();
        for v in 0..4 {
            for a in 0..4 {
                let mut c = ScalarField::zeros(grid);
                let mut used = false;
                if let Some(f) = &dw[a][v] {
                    c += f;
                    used = true;
                }
                if let Some(r) = geometry.ricci.get(a, v) {
                    c -= r;
                    used = true;
                }
                if used {
                    if let Some(g) = gamma_diag(a) {
                        c = c.hadamard(g);
                    }
                }
                if a == v {
                    c -= &divw;
                    c = c.map(|x| x - mu2);
                    used = true;
                }
                lin[v][a] = used.then_some(c);
            }
        }

        Ok(GordonEngine {
            grid: *grid,
            mu_p: medium.mu_p(),
            cfl: DEFAULT_CFL,
            g00,
            inv_n2,
            w,
            lin,
            geometry,
        })
    }

    /// Sets the CFL factor, rejecting factors beyond the RK4 stability bound.
    pub fn with_cfl(mut self, cfl: f64) -> Result<Self> {
        integrator::check_cfl(&self.grid, cfl, self.max_speed())?;
        self.cfl = cfl;
        Ok(self)
    }

    pub fn cfl(&self) -> f64 {
        self.cfl
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn geometry(&self) -> &GeometryBundle {
        &self.geometry
    }

    pub fn n(&self) -> &ScalarField {
        &self.geometry.n
    }

    /// `1 / min n`, the fastest characteristic speed.
    pub fn max_speed(&self) -> f64 {
        1.0 / self.geometry.n.min()
    }

    /// `T[b][v] = D_b At_v`, with `Pi` supplying the time derivative.
    fn covariant_gradient(&self, s: &GordonState) -> [[ScalarField; 4]; 4] {
        let chris = &self.geometry.christoffel;
        std::array::from_fn(|b| {
            std::array::from_fn(|v| {
                let mut t = if b == 0 {
                    s.pi[v].clone()
                } else {
                    s.atld[v].partial(b - 1)
                };
                for l in 0..4 {
                    if let Some(g) = chris.get(l, b, v) {
                        fma(&mut t, -1.0, g, &s.atld[l]);
                    }
                }
                t
            })
        })
    }

    fn lorenz_from_gradient(&self, t: &[[ScalarField; 4]; 4]) -> ScalarField {
        let mut l = t[0][0].hadamard(&self.g00);
        for i in 1..=self.grid.dim() {
            l += &t[i][i];
        }
        l
    }

    /// `L = gamma^{ab} D_a At_b`.
    pub fn lorenz(&self, s: &GordonState) -> ScalarField {
        self.lorenz_from_gradient(&self.covariant_gradient(s))
    }

    /// Residual of the Gauss law written for `A = At / n`, scaled by `n`.
    pub fn gauss_residual(&self, s: &GordonState) -> ScalarField {
        let n = &self.geometry.n;
        let a0 = s.atld[0].zip_map(n, |v, n| v / n);
        let da: [ScalarField; 3] = std::array::from_fn(|i| s.pi[i + 1].zip_map(n, |v, n| v / n));
        let mut r = apply_gauss_operator(n, self.mu_p, &a0);
        r -= &gauss_rhs(n, &da);
        r.hadamard(n)
    }

    /// Completes free data `(A_i, d_t A_i)` for the physical potential to a
    /// constrained state: `A_0` from the Gauss law, `Pi_0` from `L = 0`.
    pub fn init_from_free_data(
        &self,
        ai: [ScalarField; 3],
        dai: [ScalarField; 3],
    ) -> Result<GordonState> {
        if !(self.mu_p > 0.0) {
            return Err(ProcaError::UnsupportedLimit(
                "constrained initialization needs a positive Proca mass".into(),
            ));
        }
        let n = &self.geometry.n;
        let a0 = solve_gauss_constraint(&GaussOperatorProblem::from_free_data(n, self.mu_p, &dai))?;
        let [ax, ay, az] = ai;
        let [dx, dy, dz] = dai;
        let mut s = GordonState {
            atld: CovectorField::new([
                a0.field.hadamard(n),
                ax.hadamard(n),
                ay.hadamard(n),
                az.hadamard(n),
            ]),
            pi: CovectorField::new([
                ScalarField::zeros(&self.grid),
                dx.hadamard(n),
                dy.hadamard(n),
                dz.hadamard(n),
            ]),
            t: 0.0,
        };
        // L is affine in Pi_0 with slope gamma^{00} = -n^2
        let l = self.lorenz(&s);
        s.pi[0] = l.hadamard(&self.inv_n2);
        Ok(s)
    }

    pub fn step(&self, state: &GordonState, dt: f64) -> Result<GordonState> {
        integrator::step(self, state, dt)
    }

    pub fn evolve(
        &self,
        state: &GordonState,
        t_end: f64,
        dt: f64,
        sample_every: usize,
        keep_levels: bool,
    ) -> Result<Trajectory<GordonState, GordonMonitorReport>> {
        integrator::evolve(self, state, t_end, dt, sample_every, keep_levels)
    }

    pub fn evolve_observed(
        &self,
        state: &GordonState,
        t_end: f64,
        dt: f64,
        sample_every: usize,
        keep_levels: bool,
        observer: impl FnMut(usize, &GordonState) -> Result<()>,
    ) -> Result<Trajectory<GordonState, GordonMonitorReport>> {
        integrator::evolve_observed(self, state, t_end, dt, sample_every, keep_levels, observer)
    }

    /// Residual of the original field equation
    /// `d_a F^{ab} - mu^2 A^b`, indices raised with the optical
    /// metric, on the middle of three stored levels. Returns the L2 norm of
    /// each lowered component.
    pub fn fieldeq_residual(&self, levels: &[GordonState; 3]) -> Result<[f64; 4]> {
        let [prev, mid, next] = levels;
        let dt = mid.t - prev.t;
        let dt2 = next.t - mid.t;
        if !(dt > 0.0) || (dt2 - dt).abs() > 1e-9 * dt {
            return Err(ProcaError::LevelSpacing(format!("steps {dt:e} and {dt2:e}")));
        }
        let n = &self.geometry.n;
        let [p, m, q] = [prev, mid, next].map(|s| s.potential(n));
        let dim = self.grid.dim();
        let ddt = |a: usize| &(&q[a] - &p[a]) * (0.5 / dt);
        let d2dt = |a: usize| {
            let mut f = &q[a] + &p[a];
            f.axpy(-2.0, &m[a]);
            &f * (1.0 / (dt * dt))
        };
        // F_{0i} at the middle level and its time derivative
        let f0: Vec<ScalarField> = (0..3).map(|i| &ddt(i + 1) - &m[0].partial(i)).collect();
        let df0: Vec<ScalarField> = (0..3)
            .map(|i| &d2dt(i + 1) - &ddt(0).partial(i))
            .collect();
        let mu2 = self.mu_p * self.mu_p;
        let n2 = n.hadamard(n);

        let mut out = [0.0; 4];
        // b = 0: d_i(gamma^{ii} gamma^{00} F_{i0}) - mu^2 gamma^{00} A_0
        let mut r0 = ScalarField::zeros(&self.grid);
        for (i, f) in f0.iter().enumerate() {
            r0 += &f.hadamard(&n2).partial(i);
        }
        fma(&mut r0, mu2, &n2, &m[0]);
        // lowered with gamma_{00} = -1/n^2
        out[0] = (-&r0.hadamard(&self.inv_n2)).norm_l2();
        for i in 0..3 {
            // d_0(gamma^{00} F_{0i}) + d_j F_{ji} - mu^2 A_i
            let mut r = ScalarField::zeros(&self.grid);
            fma(&mut r, -1.0, &n2, &df0[i]);
            for j in 0..dim {
                let fji = &m[i + 1].partial(j) - &m[j + 1].partial(i);
                r += &fji.partial(j);
            }
            r.axpy(-mu2, &m[i + 1]);
            out[i + 1] = r.norm_l2();
        }
        Ok(out)
    }
}

impl System for GordonEngine {
    type State = GordonState;
    type Report = GordonMonitorReport;

    fn rhs(&self, s: &GordonState) -> GordonState {
        let chris = &self.geometry.christoffel;
        let t = self.covariant_gradient(s);
        let dim = self.grid.dim();
        let dpi = std::array::from_fn(|v| {
            // spatial part of the box: sum_i D_i T_{iv}, then connection terms
            let mut e = ScalarField::zeros(&self.grid);
            for i in 1..=dim {
                e += &t[i][v].partial(i - 1);
            }
            // -gamma^{aa} (G^l_{aa} T_{lv} + G^l_{av} T_{al}); the a = 0 part
            // also carries -gamma^{00} G^l_{0v} Pi_l from d_0 T_{0v}
            let mut conn = ScalarField::zeros(&self.grid);
            for l in 0..4 {
                if let Some(g) = chris.get(l, 0, v) {
                    fma(&mut conn, 1.0, g, &s.pi[l]);
                    fma(&mut conn, 1.0, g, &t[0][l]);
                }
                if let Some(g) = chris.get(l, 0, 0) {
                    fma(&mut conn, 1.0, g, &t[l][v]);
                }
            }
            fma(&mut e, -1.0, &self.g00, &conn);
            for a in 1..=dim {
                for l in 0..4 {
                    if let Some(g) = chris.get(l, a, a) {
                        fma(&mut e, -1.0, g, &t[l][v]);
                    }
                    if let Some(g) = chris.get(l, a, v) {
                        fma(&mut e, -1.0, g, &t[a][l]);
                    }
                }
            }
            // -w^i T_{iv}
            for (i, w) in self.w.iter().enumerate().skip(1) {
                if let Some(w) = w {
                    fma(&mut e, -1.0, w, &t[i][v]);
                }
            }
            for (a, c) in self.lin[v].iter().enumerate() {
                if let Some(c) = c {
                    fma(&mut e, 1.0, c, &s.atld[a]);
                }
            }
            e.hadamard(&self.inv_n2)
        });
        GordonState {
            atld: s.pi.clone(),
            pi: CovectorField::new(dpi),
            t: s.t,
        }
    }

    fn max_dt(&self) -> f64 {
        self.cfl * self.grid.min_spacing() / self.max_speed()
    }

    fn monitors(&self, s: &GordonState) -> GordonMonitorReport {
        let lorenz = self.lorenz(s);
        let gauss = self.gauss_residual(s);
        GordonMonitorReport {
            t: s.t,
            atld0_l2: s.atld[0].norm_l2(),
            atldi_l2: s.atld.spatial_norm_l2(),
            lorenz_l2: lorenz.norm_l2(),
            lorenz_linf: lorenz.norm_linf(),
            gauss_l2: gauss.norm_l2(),
            gauss_linf: gauss.norm_linf(),
        }
    }
}
