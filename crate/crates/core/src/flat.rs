//! Evolution engine for a medium at rest in Minkowski space with constant
//! refractive index and mass metric `m = g + lambda u u`, `lambda < 1`.
//!
//! The evolved system, reduced to first order in time, is
//!
//! ```text
//! (lambda - 1) A0''  + L A0  - mu^2 n^-2 (1 - lambda) A0  = 0
//! -n^2 A_i''         + L A_i - mu^2 A_i                   = (1 - lambda - n^2) d_i phi
//! (lambda - 1) phi'' + L phi - mu^2 n^-2 (1 - lambda) phi = 0
//! ```
//!
//! with `phi` an independent field standing in for `A0'`. The identities
//! `phi = A0'` and `(1 - lambda) A0' = d_i A_i`, and the Gauss constraint,
//! are monitored rather than enforced.

use crate::elliptic::{solve_screened_poisson, ScreenedPoissonProblem};
use crate::error::{ProcaError, Result};
use crate::geometry::{classify_symbol, MediumSpec, SymbolKind};
use crate::grid::{divergence, laplacian, GridSpec, ScalarField};
use crate::integrator::{self, OdeState, System, Trajectory};

pub const DEFAULT_CFL: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct FlatState {
    pub a0: ScalarField,
    pub da0: ScalarField,
    pub ai: [ScalarField; 3],
    pub dai: [ScalarField; 3],
    pub phi: ScalarField,
    pub dphi: ScalarField,
    pub t: f64,
}

impl FlatState {
    pub fn zeros(grid: &GridSpec) -> Self {
        let z = ScalarField::zeros(grid);
        FlatState {
            a0: z.clone(),
            da0: z.clone(),
            ai: [z.clone(), z.clone(), z.clone()],
            dai: [z.clone(), z.clone(), z.clone()],
            phi: z.clone(),
            dphi: z,
            t: 0.0,
        }
    }

    fn fields(&self) -> impl Iterator<Item = &ScalarField> {
        [&self.a0, &self.da0, &self.phi, &self.dphi]
            .into_iter()
            .chain(self.ai.iter())
            .chain(self.dai.iter())
    }

    fn fields_mut(&mut self) -> impl Iterator<Item = &mut ScalarField> {
        [&mut self.a0, &mut self.da0, &mut self.phi, &mut self.dphi]
            .into_iter()
            .chain(self.ai.iter_mut())
            .chain(self.dai.iter_mut())
    }

    /// The four-potential `(A0, A_x, A_y, A_z)`.
    pub fn potential(&self) -> [&ScalarField; 4] {
        [&self.a0, &self.ai[0], &self.ai[1], &self.ai[2]]
    }
}

impl OdeState for FlatState {
    fn time(&self) -> f64 {
        self.t
    }

    fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    fn axpy(&mut self, a: f64, other: &Self) {
        for (f, o) in self.fields_mut().zip(other.fields()) {
            f.axpy(a, o);
        }
    }

    fn is_finite(&self) -> bool {
        self.fields().all(ScalarField::is_finite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorReport {
    pub t: f64,
    pub a0_l2: f64,
    pub ai_l2: f64,
    pub phi_l2: f64,
    pub c1_l2: f64,
    pub c1_linf: f64,
    pub c2_l2: f64,
    pub c2_linf: f64,
    pub gauss_l2: f64,
    pub gauss_linf: f64,
}

impl MonitorReport {
    pub const CSV_HEADER: &'static str =
        "t,a0_l2,ai_l2,phi_l2,c1_l2,c1_linf,c2_l2,c2_linf,gauss_l2,gauss_linf";

    pub fn values(&self) -> [f64; 10] {
        [
            self.t,
            self.a0_l2,
            self.ai_l2,
            self.phi_l2,
            self.c1_l2,
            self.c1_linf,
            self.c2_l2,
            self.c2_linf,
            self.gauss_l2,
            self.gauss_linf,
        ]
    }
}

#[derive(Debug, Clone)]
pub struct FlatEngine {
    grid: GridSpec,
    n: f64,
    lambda: f64,
    mu_p: f64,
    cfl: f64,
}

impl FlatEngine {
    /// Rejects spatially varying `n` and any `lambda` for which the `A0`
    /// operator is not hyperbolic.
    pub fn new(medium: &MediumSpec, grid: &GridSpec) -> Result<Self> {
        let n = medium.n().constant_value().ok_or_else(|| {
            ProcaError::Domain("the flat engine needs a constant refractive index".into())
        })?;
        let class = classify_symbol(medium.lambda());
        if class.kind != SymbolKind::Hyperbolic {
            return Err(ProcaError::NotHyperbolic {
                lambda: medium.lambda(),
                class,
            });
        }
        Ok(FlatEngine {
            grid: *grid,
            n,
            lambda: medium.lambda(),
            mu_p: medium.mu_p(),
            cfl: DEFAULT_CFL,
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

    /// Fastest characteristic speed, `max(1/n, 1/sqrt(1 - lambda))`.
    pub fn max_speed(&self) -> f64 {
        (1.0 / self.n).max(1.0 / (1.0 - self.lambda).sqrt())
    }

    /// `(1 - lambda) mu^2 / n^2`, the screening of the `A0` and `phi` equations.
    fn a0_mass2(&self) -> f64 {
        (1.0 - self.lambda) * self.mu_p * self.mu_p / (self.n * self.n)
    }

    /// Completes free data `(A_i, d_t A_i)` to a constrained state at `t = 0`.
    pub fn init_from_free_data(
        &self,
        ai: [ScalarField; 3],
        dai: [ScalarField; 3],
    ) -> Result<FlatState> {
        if !(self.mu_p > 0.0) {
            return Err(ProcaError::UnsupportedLimit(
                "constrained initialization needs a positive Proca mass".into(),
            ));
        }
        let inv = 1.0 / (1.0 - self.lambda);
        let div_dai = divergence(&dai);
        let a0 = solve_screened_poisson(&ScreenedPoissonProblem {
            rhs: div_dai.clone(),
            mass2: self.a0_mass2(),
        })?;
        let da0 = &divergence(&ai) * inv;
        Ok(FlatState {
            a0,
            phi: da0.clone(),
            da0,
            dphi: &div_dai * inv,
            ai,
            dai,
            t: 0.0,
        })
    }

    pub fn step(&self, state: &FlatState, dt: f64) -> Result<FlatState> {
        integrator::step(self, state, dt)
    }

    pub fn evolve(
        &self,
        state: &FlatState,
        t_end: f64,
        dt: f64,
        sample_every: usize,
        keep_levels: bool,
    ) -> Result<Trajectory<FlatState, MonitorReport>> {
        integrator::evolve(self, state, t_end, dt, sample_every, keep_levels)
    }

    pub fn evolve_observed(
        &self,
        state: &FlatState,
        t_end: f64,
        dt: f64,
        sample_every: usize,
        keep_levels: bool,
        observer: impl FnMut(usize, &FlatState) -> Result<()>,
    ) -> Result<Trajectory<FlatState, MonitorReport>> {
        integrator::evolve_observed(self, state, t_end, dt, sample_every, keep_levels, observer)
    }

    /// Residual of the original second-order field equation
    /// `box_gamma A_b - gamma^{sr} d_b d_s A_r - mu^2 A_s m^{sr} gamma_{rb}`
    /// on the middle of three stored levels, with centered time differences.
    /// Returns the L2 norm per component `b`.
    pub fn fieldeq_residual(&self, levels: &[FlatState; 3]) -> Result<[f64; 4]> {
        let [prev, mid, next] = levels;
        let dt = mid.t - prev.t;
        let dt2 = next.t - mid.t;
        if !(dt > 0.0) || (dt2 - dt).abs() > 1e-9 * dt {
            return Err(ProcaError::LevelSpacing(format!(
                "steps {dt:e} and {dt2:e}"
            )));
        }
        let p = prev.potential();
        let m = mid.potential();
        let q = next.potential();
        let first: [ScalarField; 4] =
            std::array::from_fn(|r| &(q[r] - p[r]) * (0.5 / dt));
        let second: [ScalarField; 4] = std::array::from_fn(|r| {
            let mut f = q[r] + p[r];
            f.axpy(-2.0, m[r]);
            &f * (1.0 / (dt * dt))
        });

        let dim = self.grid.dim();
        let g00 = -self.n * self.n;
        // m^{sr} gamma_{rb}, diagonal
        let mass_gamma = [(self.lambda - 1.0) * (-1.0 / (self.n * self.n)), 1.0, 1.0, 1.0];
        let mu2 = self.mu_p * self.mu_p;

        // d_b d_s A_s with b, s in 0..4; time derivatives from the levels
        let dd = |b: usize, s: usize| -> ScalarField {
            match (b, s) {
                (0, 0) => second[0].clone(),
                (0, j) | (j, 0) if j - 1 < dim => first[s].partial(j - 1),
                (0, _) | (_, 0) => ScalarField::zeros(&self.grid),
                (i, j) if i - 1 < dim && j - 1 < dim => m[s].partial(j - 1).partial(i - 1),
                _ => ScalarField::zeros(&self.grid),
            }
        };

        let mut out = [0.0; 4];
        for (b, o) in out.iter_mut().enumerate() {
            let mut box_term = &second[b] * g00;
            box_term += &laplacian(m[b]);
            let mut contracted = &dd(b, 0) * g00;
            for s in 1..4 {
                contracted += &dd(b, s);
            }
            let mut r = &box_term - &contracted;
            r.axpy(-mu2 * mass_gamma[b], m[b]);
            *o = r.norm_l2();
        }
        Ok(out)
    }
}

impl System for FlatEngine {
    type State = FlatState;
    type Report = MonitorReport;

    fn rhs(&self, s: &FlatState) -> FlatState {
        let one_minus_lambda = 1.0 - self.lambda;
        let inv_n2 = 1.0 / (self.n * self.n);
        let mu2 = self.mu_p * self.mu_p;
        let m2 = self.a0_mass2();
        let source = one_minus_lambda - self.n * self.n;

        let mut dda0 = laplacian(&s.a0);
        dda0.axpy(-m2, &s.a0);
        let mut ddphi = laplacian(&s.phi);
        ddphi.axpy(-m2, &s.phi);
        let ddai = std::array::from_fn(|i| {
            let mut f = laplacian(&s.ai[i]);
            f.axpy(-mu2, &s.ai[i]);
            if source != 0.0 && i < self.grid.dim() {
                f.axpy(-source, &s.phi.partial(i));
            }
            &f * inv_n2
        });
        FlatState {
            a0: s.da0.clone(),
            da0: &dda0 * (1.0 / one_minus_lambda),
            ai: s.dai.clone(),
            dai: ddai,
            phi: s.dphi.clone(),
            dphi: &ddphi * (1.0 / one_minus_lambda),
            t: s.t,
        }
    }

    fn max_dt(&self) -> f64 {
        self.cfl * self.grid.min_spacing() / self.max_speed()
    }

    fn monitors(&self, s: &FlatState) -> MonitorReport {
        let c1 = &s.phi - &s.da0;
        let mut c2 = &s.da0 * (1.0 - self.lambda);
        c2 -= &divergence(&s.ai);
        let mut gauss = laplacian(&s.a0);
        gauss.axpy(-self.a0_mass2(), &s.a0);
        gauss -= &divergence(&s.dai);
        let ai_l2 = s.ai.iter().map(|f| f.norm_l2().powi(2)).sum::<f64>().sqrt();
        MonitorReport {
            t: s.t,
            a0_l2: s.a0.norm_l2(),
            ai_l2,
            phi_l2: s.phi.norm_l2(),
            c1_l2: c1.norm_l2(),
            c1_linf: c1.norm_linf(),
            c2_l2: c2.norm_l2(),
            c2_linf: c2.norm_linf(),
            gauss_l2: gauss.norm_l2(),
            gauss_linf: gauss.norm_linf(),
        }
    }
}
