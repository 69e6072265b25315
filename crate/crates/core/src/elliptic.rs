//! Initial-data elliptic solves.
//!
//! The constant-coefficient screened-Poisson problem `(L_h - m^2) u = f` is
//! solved exactly in the discrete Fourier basis using the symbol of the same
//! compact Laplacian `L_h` the engines use. The variable-index Gauss
//! constraint is solved by preconditioned conjugate gradients, preconditioned
//! with the screened-Poisson solve at the mean coefficient.

use rustfft::num_complex::Complex64;

use crate::error::{ProcaError, Result};
use crate::grid::{divergence, laplacian, GridSpec, ScalarField};
use crate::spectral;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenedPoissonProblem {
    pub rhs: ScalarField,
    /// Screening coefficient, `>= 0`.
    pub mass2: f64,
}

/// `(L_h - mass2) u - rhs`
pub fn screened_poisson_residual(u: &ScalarField, rhs: &ScalarField, mass2: f64) -> ScalarField {
    let mut r = laplacian(u);
    r.axpy(-mass2, u);
    r -= rhs;
    r
}

pub fn solve_screened_poisson(p: &ScreenedPoissonProblem) -> Result<ScalarField> {
    if !(p.mass2.is_finite() && p.mass2 >= 0.0) {
        return Err(ProcaError::Domain(format!(
            "screening coefficient must be non-negative, got {}",
            p.mass2
        )));
    }
    let grid = *p.rhs.grid();
    if p.mass2 == 0.0 {
        let mean = p.rhs.mean();
        if mean.abs() > 1e-12 * p.rhs.norm_linf().max(f64::MIN_POSITIVE) {
            return Err(ProcaError::Solvability { mean });
        }
    }
    Ok(apply_inverse(&p.rhs, &grid, p.mass2, 1.0))
}

/// `u = scale * (L_h - mass2)^{-1} f`, dropping the zero mode when `mass2 = 0`.
fn apply_inverse(f: &ScalarField, grid: &GridSpec, mass2: f64, scale: f64) -> ScalarField {
    let symbol = spectral::laplacian_symbol(grid);
    let mut spec = spectral::forward_real(f.values(), grid);
    for (c, s) in spec.iter_mut().zip(&symbol) {
        let denom = -(s + mass2);
        *c = if denom == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            *c * (scale / denom)
        };
    }
    ScalarField::from_values(grid, spectral::inverse_real(spec, grid)).expect("same grid")
}

/// Discrete `d_i (c d_i u)` written as `(L(cu) + c L u - u L c) / 2`, which
/// is symmetric and reduces to `c L_h u` for constant `c`.
pub fn div_coef_grad(c: &ScalarField, u: &ScalarField) -> ScalarField {
    let mut out = laplacian(&c.hadamard(u));
    out += &c.hadamard(&laplacian(u));
    out -= &u.hadamard(&laplacian(c));
    &out * 0.5
}

/// Gauss operator on `A_0` for the optical-metric mass term at rest:
/// `d_i(n^2 d_i A_0) - mu^2 n^2 A_0`.
pub fn apply_gauss_operator(n: &ScalarField, mu_p: f64, a0: &ScalarField) -> ScalarField {
    let n2 = n.hadamard(n);
    let mut out = div_coef_grad(&n2, a0);
    out.axpy(-mu_p * mu_p, &n2.hadamard(a0));
    out
}

/// Right-hand side `d_i(n^2 d_t A_i)` of the Gauss constraint.
pub fn gauss_rhs(n: &ScalarField, da: &[ScalarField; 3]) -> ScalarField {
    let n2 = n.hadamard(n);
    divergence(&[n2.hadamard(&da[0]), n2.hadamard(&da[1]), n2.hadamard(&da[2])])
}

/// Gauss constraint for the optical-metric mass term with a static,
/// spatially varying index:
/// `d_i(n^2 (d_i A_0 - d_t A_i)) - mu^2 n^2 A_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussOperatorProblem {
    pub n: ScalarField,
    pub mu_p: f64,
    pub rhs: ScalarField,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl GaussOperatorProblem {
    /// Problem posed by the free data `d_t A_i`.
    pub fn from_free_data(n: &ScalarField, mu_p: f64, da: &[ScalarField; 3]) -> Self {
        GaussOperatorProblem {
            n: n.clone(),
            mu_p,
            rhs: gauss_rhs(n, da),
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }

    pub fn with_rhs(n: &ScalarField, mu_p: f64, rhs: ScalarField) -> Self {
        GaussOperatorProblem {
            n: n.clone(),
            mu_p,
            rhs,
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticSolution {
    pub field: ScalarField,
    pub iterations: usize,
    /// Final `||A u - f|| / ||f||`.
    pub relative_residual: f64,
}

pub fn solve_gauss_constraint(p: &GaussOperatorProblem) -> Result<EllipticSolution> {
    if !(p.mu_p > 0.0) {
        return Err(ProcaError::UnsupportedLimit(
            "constrained initialization needs a positive Proca mass".into(),
        ));
    }
    if !(p.n.is_finite() && p.n.min() > 0.0) {
        return Err(ProcaError::Domain("refractive index must be positive".into()));
    }
    let grid = *p.rhs.grid();
    let mu2 = p.mu_p * p.mu_p;
    let b_norm = p.rhs.norm_l2();
    if b_norm == 0.0 {
        return Ok(EllipticSolution {
            field: ScalarField::zeros(&grid),
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let n2 = p.n.hadamard(&p.n);
    let c_mean = n2.mean();

    // Solve K x = b with K = -G (symmetric positive definite) and b = -rhs.
    let apply_k = |u: &ScalarField| -apply_gauss_operator(&p.n, p.mu_p, u);
    let precondition = |r: &ScalarField| apply_inverse(r, &grid, mu2, -1.0 / c_mean);

    let b = -&p.rhs;
    let mut x = precondition(&b);
    let mut r = &b - &apply_k(&x);
    let mut z = precondition(&r);
    let mut d = z.clone();
    let mut rz = r.dot(&z);
    let mut rel = r.norm_l2() / b_norm;
    let mut iterations = 0;
    while rel > p.tolerance {
        if iterations >= p.max_iterations {
            return Err(ProcaError::NonConvergence {
                iterations,
                residual: rel,
            });
        }
        let kd = apply_k(&d);
        let alpha = rz / d.dot(&kd);
        x.axpy(alpha, &d);
        r.axpy(-alpha, &kd);
        z = precondition(&r);
        let rz_next = r.dot(&z);
        let beta = rz_next / rz;
        rz = rz_next;
        d = &z + &(&d * beta);
        iterations += 1;
        rel = r.norm_l2() / b_norm;
    }
    // recurrence drift check against the true residual
    let true_rel = (&apply_gauss_operator(&p.n, p.mu_p, &x) - &p.rhs).norm_l2() / b_norm;
    if true_rel > p.tolerance {
        return Err(ProcaError::NonConvergence {
            iterations,
            residual: true_rel,
        });
    }
    Ok(EllipticSolution {
        field: x,
        iterations,
        relative_residual: true_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{random_bandlimited, StencilOrder};
    use std::f64::consts::PI;

    fn line(n: usize) -> GridSpec {
        GridSpec::uniform(1, n, 2.0 * PI, StencilOrder::Second).unwrap()
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let grid = line(32);
        let p = ScreenedPoissonProblem {
            rhs: ScalarField::zeros(&grid),
            mass2: 2.0,
        };
        assert_eq!(solve_screened_poisson(&p).unwrap().norm_linf(), 0.0);
    }

    #[test]
    fn single_mode_uses_stencil_symbol() {
        let grid = line(64);
        let rhs = ScalarField::from_fn(&grid, |x| x[0].sin());
        let u = solve_screened_poisson(&ScreenedPoissonProblem {
            rhs: rhs.clone(),
            mass2: 3.0,
        })
        .unwrap();
        let s1 = grid.second_derivative_symbol(0, 1);
        let expect = &rhs * (-1.0 / (s1 + 3.0));
        assert!((&u - &expect).norm_linf() < 1e-14);
        // continuum limit -sin x / 4
        assert!((&u - &(&rhs * -0.25)).norm_linf() < 1e-3);
    }

    #[test]
    fn cos2x_converges_to_continuum() {
        let err = |n| {
            let grid = line(n);
            let rhs = ScalarField::from_fn(&grid, |x| (2.0 * x[0]).cos());
            let u = solve_screened_poisson(&ScreenedPoissonProblem { rhs, mass2: 1.0 }).unwrap();
            let exact = ScalarField::from_fn(&grid, |x| -(2.0 * x[0]).cos() / 5.0);
            (&u - &exact).norm_linf()
        };
        let ratio = err(32) / err(64);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn zero_mass_requires_zero_mean() {
        let grid = line(32);
        let rhs = ScalarField::from_fn(&grid, |x| 1.0 + x[0].sin());
        let err = solve_screened_poisson(&ScreenedPoissonProblem { rhs, mass2: 0.0 });
        assert!(matches!(err, Err(ProcaError::Solvability { .. })));
        let rhs = ScalarField::from_fn(&grid, |x| x[0].sin());
        let u = solve_screened_poisson(&ScreenedPoissonProblem {
            rhs: rhs.clone(),
            mass2: 0.0,
        })
        .unwrap();
        assert!(screened_poisson_residual(&u, &rhs, 0.0).norm_linf() < 1e-13);
    }

    #[test]
    fn random_rhs_residual_2d() {
        let grid = GridSpec::uniform(2, 32, 1.0, StencilOrder::Fourth).unwrap();
        let rhs = random_bandlimited(3, 6, &grid).unwrap();
        let u = solve_screened_poisson(&ScreenedPoissonProblem {
            rhs: rhs.clone(),
            mass2: 0.7,
        })
        .unwrap();
        let r = screened_poisson_residual(&u, &rhs, 0.7);
        assert!(r.norm_l2() <= 1e-12 * rhs.norm_l2());
    }

    #[test]
    fn div_coef_grad_is_laplacian_for_constant_coefficient() {
        let grid = line(64);
        let u = random_bandlimited(5, 10, &grid).unwrap();
        let c = ScalarField::constant(&grid, 2.25);
        let lhs = div_coef_grad(&c, &u);
        let rhs = &laplacian(&u) * 2.25;
        assert!((&lhs - &rhs).norm_linf() < 1e-10);
    }

    #[test]
    fn div_coef_grad_is_symmetric() {
        let grid = GridSpec::uniform(2, 16, 1.0, StencilOrder::Second).unwrap();
        let c = ScalarField::from_fn(&grid, |x| 1.0 + 0.3 * (2.0 * PI * x[0]).sin());
        let u = random_bandlimited(1, 5, &grid).unwrap();
        let v = random_bandlimited(2, 5, &grid).unwrap();
        let a = v.dot(&div_coef_grad(&c, &u));
        let b = u.dot(&div_coef_grad(&c, &v));
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn gauss_zero_data() {
        let grid = line(32);
        let n = ScalarField::from_fn(&grid, |x| 1.0 + 0.1 * x[0].sin());
        let z = ScalarField::zeros(&grid);
        let p = GaussOperatorProblem::from_free_data(&n, 1.0, &[z.clone(), z.clone(), z]);
        let sol = solve_gauss_constraint(&p).unwrap();
        assert_eq!(sol.field.norm_linf(), 0.0);
    }

    #[test]
    fn gauss_requires_positive_mass() {
        let grid = line(32);
        let n = ScalarField::constant(&grid, 1.2);
        let p = GaussOperatorProblem::with_rhs(&n, 0.0, ScalarField::from_fn(&grid, |x| x[0].sin()));
        assert!(matches!(
            solve_gauss_constraint(&p),
            Err(ProcaError::UnsupportedLimit(_))
        ));
    }

    #[test]
    fn gauss_reports_non_convergence() {
        let grid = line(64);
        let n = ScalarField::from_fn(&grid, |x| 1.0 + 0.5 * x[0].sin());
        let mut p =
            GaussOperatorProblem::with_rhs(&n, 1.0, random_bandlimited(9, 12, &grid).unwrap());
        p.max_iterations = 1;
        p.tolerance = 1e-14;
        match solve_gauss_constraint(&p) {
            Err(ProcaError::NonConvergence {
                iterations,
                residual,
            }) => {
                assert_eq!(iterations, 1);
                assert!(residual > 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gauss_constant_index_matches_screened_poisson() {
        let grid = GridSpec::uniform(2, 32, 2.0 * PI, StencilOrder::Second).unwrap();
        let n = ScalarField::constant(&grid, 1.5);
        let da = [
            random_bandlimited(1, 6, &grid).unwrap(),
            random_bandlimited(2, 6, &grid).unwrap(),
            ScalarField::zeros(&grid),
        ];
        let gauss = solve_gauss_constraint(&GaussOperatorProblem::from_free_data(&n, 1.0, &da))
            .unwrap()
            .field;
        let direct = solve_screened_poisson(&ScreenedPoissonProblem {
            rhs: divergence(&da),
            mass2: 1.0,
        })
        .unwrap();
        assert!((&gauss - &direct).norm_linf() < 1e-10 * direct.norm_linf());
    }

    #[test]
    fn gauss_manufactured_solution() {
        let grid = GridSpec::uniform(2, 64, 2.0 * PI, StencilOrder::Second).unwrap();
        let n = ScalarField::from_fn(&grid, |x| 1.0 + 0.1 * x[0].sin() + 0.05 * x[1].cos());
        let exact = ScalarField::from_fn(&grid, |x| (x[0] + 2.0 * x[1]).sin() + 0.3 * x[1].cos());
        let rhs = apply_gauss_operator(&n, 1.0, &exact);
        let sol = solve_gauss_constraint(&GaussOperatorProblem::with_rhs(&n, 1.0, rhs)).unwrap();
        assert!(sol.relative_residual <= 1e-10);
        let err = (&sol.field - &exact).norm_l2() / exact.norm_l2();
        assert!(err <= 1e-10, "err {err}");
    }
}
