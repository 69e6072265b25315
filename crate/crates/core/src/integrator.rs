//! Classical four-stage Runge-Kutta time stepping and the shared evolution
//! loop used by both engines.

use std::collections::VecDeque;

use crate::error::{ProcaError, Result};
use crate::grid::GridSpec;

/// Evolved state of a method-of-lines system. Time derivatives are
/// represented by the same type; their time stamp is ignored.
pub trait OdeState: Clone {
    fn time(&self) -> f64;
    fn set_time(&mut self, t: f64);
    /// `self += a * other` on every evolved field.
    fn axpy(&mut self, a: f64, other: &Self);
    fn is_finite(&self) -> bool;
}

pub trait System {
    type State: OdeState;
    type Report;

    fn rhs(&self, state: &Self::State) -> Self::State;
    /// Largest admissible step under the configured CFL factor.
    fn max_dt(&self) -> f64;
    fn monitors(&self, state: &Self::State) -> Self::Report;
}

#[derive(Debug, Clone)]
pub struct Trajectory<S, R> {
    pub state: S,
    pub reports: Vec<R>,
    /// Last three time levels, oldest first, when requested.
    pub levels: Option<[S; 3]>,
}

pub fn rk4<S: OdeState>(state: &S, dt: f64, rhs: impl Fn(&S) -> S) -> S {
    let k1 = rhs(state);
    let mut y = state.clone();
    y.axpy(0.5 * dt, &k1);
    let k2 = rhs(&y);
    let mut y = state.clone();
    y.axpy(0.5 * dt, &k2);
    let k3 = rhs(&y);
    let mut y = state.clone();
    y.axpy(dt, &k3);
    let k4 = rhs(&y);
    let mut out = state.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    out.set_time(state.time() + dt);
    out
}

fn check_dt<Sys: System>(system: &Sys, dt: f64) -> Result<()> {
    let limit = system.max_dt();
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(ProcaError::Cfl { dt, limit });
    }
    Ok(())
}

pub fn step<Sys: System>(system: &Sys, state: &Sys::State, dt: f64) -> Result<Sys::State> {
    check_dt(system, dt)?;
    Ok(rk4(state, dt, |s| system.rhs(s)))
}

/// Number of uniform steps covering `[t0, t_end]` with steps no longer than `dt`.
pub fn step_count(t0: f64, t_end: f64, dt: f64) -> usize {
    let span = t_end - t0;
    if span <= 0.0 {
        return 0;
    }
    (span / dt - 1e-9).ceil().max(1.0) as usize
}

/// Stability bound of classical RK4 on the imaginary axis.
pub const RK4_IMAGINARY_LIMIT: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Largest CFL factor `c dt / h_min` for which RK4 stays stable on a wave
/// equation discretized with the grid's stencils, mass terms neglected.
pub fn cfl_limit(grid: &GridSpec) -> f64 {
    let symbol_sum: f64 = (0..grid.dim())
        .map(|a| {
            (0..grid.points()[a])
                .map(|i| grid.second_derivative_symbol(a, grid.mode_number(a, i)))
                .fold(0.0, f64::max)
        })
        .sum();
    RK4_IMAGINARY_LIMIT / (grid.min_spacing() * symbol_sum.sqrt())
}

/// Validates a CFL factor for a system with characteristic speed `speed`.
pub fn check_cfl(grid: &GridSpec, cfl: f64, speed: f64) -> Result<()> {
    if !(cfl.is_finite() && cfl > 0.0) {
        return Err(ProcaError::Domain(format!("CFL factor must be positive, got {cfl}")));
    }
    let limit = cfl_limit(grid);
    if cfl > limit {
        let h = grid.min_spacing();
        return Err(ProcaError::Cfl {
            dt: cfl * h / speed,
            limit: limit * h / speed,
        });
    }
    Ok(())
}

/// Advances to `t_end` in uniform steps no longer than `dt`, recording a
/// report every `sample_every` steps (0: first and last only).
pub fn evolve<Sys: System>(
    system: &Sys,
    state: &Sys::State,
    t_end: f64,
    dt: f64,
    sample_every: usize,
    keep_levels: bool,
) -> Result<Trajectory<Sys::State, Sys::Report>> {
    evolve_observed(system, state, t_end, dt, sample_every, keep_levels, |_, _| Ok(()))
}

/// As [`evolve`], calling `observer` with the step index and state after
/// every step, including step 0.
pub fn evolve_observed<Sys: System>(
    system: &Sys,
    state: &Sys::State,
    t_end: f64,
    dt: f64,
    sample_every: usize,
    keep_levels: bool,
    mut observer: impl FnMut(usize, &Sys::State) -> Result<()>,
) -> Result<Trajectory<Sys::State, Sys::Report>> {
    let t0 = state.time();
    if t_end < t0 {
        return Err(ProcaError::Domain(format!(
            "end time {t_end} precedes the state time {t0}"
        )));
    }
    let steps = step_count(t0, t_end, dt);
    let dt = if steps > 0 { (t_end - t0) / steps as f64 } else { dt };
    if steps > 0 {
        check_dt(system, dt)?;
    }
    let mut current = state.clone();
    observer(0, &current)?;
    let mut reports = vec![system.monitors(&current)];
    let mut history: VecDeque<Sys::State> = VecDeque::with_capacity(3);
    if keep_levels {
        history.push_back(current.clone());
    }
    for k in 1..=steps {
        let mut next = rk4(&current, dt, |s| system.rhs(s));
        next.set_time(t0 + k as f64 * dt);
        if !next.is_finite() {
            return Err(ProcaError::Divergence { t: next.time() });
        }
        current = next;
        observer(k, &current)?;
        if keep_levels {
            if history.len() == 3 {
                history.pop_front();
            }
            history.push_back(current.clone());
        }
        if (sample_every > 0 && k % sample_every == 0) || k == steps {
            reports.push(system.monitors(&current));
        }
    }
    let levels = if keep_levels && history.len() == 3 {
        let mut it = history.into_iter();
        Some([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
    } else {
        None
    };
    Ok(Trajectory {
        state: current,
        reports,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::StencilOrder;

    #[test]
    fn cfl_limits() {
        let g = GridSpec::uniform(1, 64, 1.0, StencilOrder::Second).unwrap();
        assert!((cfl_limit(&g) - std::f64::consts::SQRT_2).abs() < 1e-12);
        let g3 = GridSpec::uniform(3, 16, 1.0, StencilOrder::Second).unwrap();
        assert!((cfl_limit(&g3) - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let g4 = g.with_order(StencilOrder::Fourth);
        assert!(cfl_limit(&g4) < cfl_limit(&g));
        assert!(check_cfl(&g, 0.25, 2.0).is_ok());
        assert!(matches!(check_cfl(&g, 1.5, 1.0), Err(ProcaError::Cfl { .. })));
        assert!(matches!(check_cfl(&g, 0.0, 1.0), Err(ProcaError::Domain(_))));
    }

    #[derive(Clone, Debug)]
    struct Osc {
        q: f64,
        p: f64,
        t: f64,
    }

    impl OdeState for Osc {
        fn time(&self) -> f64 {
            self.t
        }
        fn set_time(&mut self, t: f64) {
            self.t = t;
        }
        fn axpy(&mut self, a: f64, o: &Self) {
            self.q += a * o.q;
            self.p += a * o.p;
        }
        fn is_finite(&self) -> bool {
            self.q.is_finite() && self.p.is_finite()
        }
    }

    struct Harmonic(f64);

    impl System for Harmonic {
        type State = Osc;
        type Report = f64;
        fn rhs(&self, s: &Osc) -> Osc {
            Osc {
                q: s.p,
                p: -self.0 * self.0 * s.q,
                t: 0.0,
            }
        }
        fn max_dt(&self) -> f64 {
            0.1
        }
        fn monitors(&self, s: &Osc) -> f64 {
            s.q
        }
    }

    #[test]
    fn fourth_order_in_time() {
        let err = |dt: f64| {
            let s = Osc { q: 1.0, p: 0.0, t: 0.0 };
            let out = evolve(&Harmonic(2.0), &s, 1.0, dt, 0, false).unwrap();
            (out.state.q - 2.0f64.cos()).abs()
        };
        let ratio = err(0.05) / err(0.025);
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
    }

    #[test]
    fn rejects_cfl_violation() {
        let s = Osc { q: 1.0, p: 0.0, t: 0.0 };
        assert!(matches!(step(&Harmonic(1.0), &s, 0.2), Err(ProcaError::Cfl { .. })));
    }

    #[test]
    fn zero_span_returns_input() {
        let s = Osc { q: 0.3, p: 0.1, t: 2.0 };
        let out = evolve(&Harmonic(1.0), &s, 2.0, 0.05, 1, true).unwrap();
        assert_eq!(out.state.q, 0.3);
        assert_eq!(out.reports.len(), 1);
        assert!(out.levels.is_none());
    }

    #[test]
    fn sampling_and_levels() {
        let s = Osc { q: 1.0, p: 0.0, t: 0.0 };
        let out = evolve(&Harmonic(1.0), &s, 1.0, 0.1, 3, true).unwrap();
        // steps 0, 3, 6, 9, 10
        assert_eq!(out.reports.len(), 5);
        let levels = out.levels.unwrap();
        assert!((levels[2].t - 1.0).abs() < 1e-15);
        assert!((levels[1].t - 0.9).abs() < 1e-12);
    }

    #[test]
    fn detects_divergence() {
        let s = Osc { q: f64::MAX, p: f64::MAX, t: 0.0 };
        let out = evolve(&Harmonic(10.0), &s, 1.0, 0.1, 0, false);
        assert!(matches!(out, Err(ProcaError::Divergence { .. })));
    }
}
