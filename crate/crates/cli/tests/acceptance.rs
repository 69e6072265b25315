//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::error::Error;
use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, ExitCode};

use proca_core::convergence::{fit_order, OrderFit, DEFAULT_FLOOR};
use proca_core::elliptic::{
    apply_gauss_operator, screened_poisson_residual, solve_gauss_constraint, solve_screened_poisson,
    GaussOperatorProblem, ScreenedPoissonProblem,
};
use proca_core::grid::random_bandlimited;
use proca_core::integrator::System;
use proca_core::modes::{dispersion_longitudinal, dispersion_transverse, measure_frequency};
use proca_core::{FlatEngine, FlatState, GordonEngine, GridSpec, MediumSpec, ScalarField, StencilOrder};
use proca_harness::{converge, run, RunConfig};

type Outcome = Result<(bool, String), Box<dyn Error>>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

const ORDER: f64 = 2.0;
const ORDER_TOL: f64 = 0.3;
const SEED: u64 = 1;

fn order_ok(fit: &OrderFit) -> bool {
    fit.within(ORDER, ORDER_TOL)
}

fn config(text: &str, dir: &Path) -> Result<RunConfig, Box<dyn Error>> {
    Ok(RunConfig::parse(&format!("{text}\noutput.dir = {}\n", dir.display()))?)
}

fn random_data(grid: &GridSpec, seed: u64) -> Result<([ScalarField; 3], [ScalarField; 3]), Box<dyn Error>> {
    let f = |k: u64| random_bandlimited(seed * 6 + k, 8, grid);
    Ok(([f(0)?, f(1)?, f(2)?], [f(3)?, f(4)?, f(5)?]))
}

const A1_CONFIG: &str = "
engine = flat
grid.points = 128
medium.n = 1.5
medium.lambda = 0.5
medium.mu = 1
init.kind = random
init.seed = 1
init.kmax = 8
evolution.t_end = 1
evolution.cfl = 0.25
";

fn a1_constraint_propagation() -> Outcome {
    let dir = tempfile::tempdir()?;
    let table = converge(&config(A1_CONFIG, dir.path())?, 3, None)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for q in &table.orders {
        pass &= order_ok(&q.fit);
        let sup = q.values.iter().fold(0.0, |a: f64, &b| a.max(b));
        parts.push(format!("{} order {} (max {sup:.2e})", q.quantity, q.fit));
    }
    Ok((pass, parts.join("; ")))
}

fn plane_wave_error(sector: &str, n: f64, lambda: f64, probe: &str, t_end: f64, points: usize, exact: f64) -> Result<f64, Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let text = format!(
        "engine = flat
grid.points = {points}
medium.n = {n}
medium.lambda = {lambda}
medium.mu = 1
init.kind = plane_wave
init.sector = {sector}
init.mode = 2
evolution.t_end = {t_end}
output.probe = {probe}:0
"
    );
    let summary = run(&config(&text, dir.path())?)?;
    let values: Vec<f64> = summary.probe.iter().map(|&(_, v)| v).collect();
    let omega = measure_frequency(&values, summary.dt)?;
    Ok((omega - exact).abs() / exact)
}

fn dispersion_check(sector: &str, n: f64, lambda: f64, probe: &str, t_end: f64, exact: f64) -> Outcome {
    let coarse = plane_wave_error(sector, n, lambda, probe, t_end, 64, exact)?;
    let fine = plane_wave_error(sector, n, lambda, probe, t_end, 128, exact)?;
    let ratio = coarse / fine;
    let pass = coarse <= 0.01 && (4.0 * 0.7..=4.0 * 1.3).contains(&ratio);
    Ok((
        pass,
        format!("omega {exact:.6}, relative error {coarse:.3e} at N=64, {fine:.3e} at N=128, ratio {ratio:.2}"),
    ))
}

fn a2_transverse_dispersion() -> Outcome {
    let medium = MediumSpec::constant(2.0, 0.0, 1.0)?;
    let exact = dispersion_transverse(2.0, &medium)?;
    assert!((exact - 5f64.sqrt() / 2.0).abs() < 1e-15);
    dispersion_check("transverse", 2.0, 0.0, "ay", 60.0, exact)
}

fn a3_longitudinal_dispersion() -> Outcome {
    let medium = MediumSpec::constant(1.0, 0.5, 1.0)?;
    let exact = dispersion_longitudinal(2.0, &medium)?;
    assert!((exact - 3.0).abs() < 1e-15);
    dispersion_check("longitudinal", 1.0, 0.5, "a0", 40.0, exact)
}

/// Sup over time of the largest pointwise gap between the flat potential
/// and the Gordon potential `A~ / n`, stepping both engines in lockstep.
fn engine_gap(points: usize) -> Result<(f64, f64), Box<dyn Error>> {
    let n = 1.5;
    let grid = GridSpec::uniform(1, points, 2.0 * PI, StencilOrder::Second)?;
    let flat = FlatEngine::new(&MediumSpec::constant(n, 1.0 - n * n, 1.0)?, &grid)?;
    let gordon = GordonEngine::new(&MediumSpec::constant(n, 0.0, 1.0)?, &grid)?;
    let (ai, dai) = random_data(&grid, SEED)?;
    let mut a = flat.init_from_free_data(ai.clone(), dai.clone())?;
    let mut b = gordon.init_from_free_data(ai, dai)?;
    let t_end = 0.5;
    let steps = proca_core::integrator::step_count(0.0, t_end, flat.max_dt().min(gordon.max_dt()));
    let dt = t_end / steps as f64;
    let gap = |a: &FlatState, b: &proca_core::GordonState| {
        let pb = b.potential(gordon.n());
        a.potential()
            .iter()
            .enumerate()
            .map(|(i, f)| (*f - &pb[i]).norm_linf())
            .fold(0.0, f64::max)
    };
    let mut worst = gap(&a, &b);
    for _ in 0..steps {
        a = flat.step(&a, dt)?;
        b = gordon.step(&b, dt)?;
        worst = worst.max(gap(&a, &b));
    }
    Ok((grid.min_spacing(), worst))
}

fn a4_cross_engine() -> Outcome {
    let (h1, e1) = engine_gap(128)?;
    let (h2, e2) = engine_gap(256)?;
    let fit = fit_order(&[h1, h2], &[e1, e2], DEFAULT_FLOOR)?;
    Ok((order_ok(&fit), format!("L-inf gap {e1:.3e} -> {e2:.3e}, order {fit}")))
}

fn a5_field_equation_residual() -> Outcome {
    let medium = MediumSpec::constant(1.5, 0.5, 1.0)?;
    let mut spacings = Vec::new();
    let mut residuals = Vec::new();
    let mut structural = true;
    for points in [128, 256, 512] {
        let grid = GridSpec::uniform(1, points, 2.0 * PI, StencilOrder::Second)?;
        let engine = FlatEngine::new(&medium, &grid)?;
        let (ai, dai) = random_data(&grid, SEED)?;
        let s = engine.init_from_free_data(ai, dai)?;
        let out = engine.evolve(&s, 1.0, engine.max_dt(), 0, true)?;
        let mut levels = out.levels.ok_or("no stored levels")?;
        let r = engine.fieldeq_residual(&levels)?;
        spacings.push(grid.min_spacing());
        residuals.push(r.iter().map(|v| v * v).sum::<f64>().sqrt());

        // equal shifts of A0 at the outer levels move only its second time difference
        let bump = random_bandlimited(99, 8, &grid)?;
        levels[0].a0 += &bump;
        levels[2].a0 += &bump;
        let shifted = engine.fieldeq_residual(&levels)?;
        let dt = levels[1].t - levels[0].t;
        let sensitivity = bump.norm_l2() / (dt * dt);
        structural &= (shifted[0] - r[0]).abs() <= 1e-12 * sensitivity;
    }
    let fit = fit_order(&spacings, &residuals, DEFAULT_FLOOR)?;
    Ok((
        order_ok(&fit) && structural,
        format!(
            "residual {:.3e} -> {:.3e}, order {fit}; time component independent of d_t^2 A0: {structural}",
            residuals[0], residuals[2]
        ),
    ))
}

fn a6_gordon_varying_index() -> Outcome {
    let dir = tempfile::tempdir()?;
    let text = "
engine = gordon
grid.points = 128
medium.n = sine(1, 0.1, 0)
medium.mu = 1
init.kind = random
init.seed = 1
init.kmax = 8
evolution.t_end = 1
evolution.cfl = 0.25
";
    let table = converge(&config(text, dir.path())?, 3, None)?;
    let pass = table.orders.iter().all(|q| order_ok(&q.fit));
    let parts: Vec<String> = table
        .orders
        .iter()
        .map(|q| format!("{} order {}", q.quantity, q.fit))
        .collect();
    Ok((pass, parts.join("; ")))
}

fn a7_hyperbolicity_gate() -> Outcome {
    let dir = tempfile::tempdir()?;
    let write = |lambda: f64, tag: &str| -> Result<std::path::PathBuf, Box<dyn Error>> {
        let path = dir.path().join(format!("{tag}.conf"));
        let text = format!(
            "engine = flat\ngrid.points = 64\nmedium.n = 1\nmedium.lambda = {lambda}\nmedium.mu = 1\n\
             evolution.t_end = 0.05\nevolution.cfl = 0.25\noutput.dir = {}\n",
            dir.path().join(tag).display()
        );
        std::fs::write(&path, text)?;
        Ok(path)
    };
    let proca = env!("CARGO_BIN_EXE_proca");
    let mut pass = true;
    let mut parts = Vec::new();
    for (lambda, class) in [(1.0, "elliptic-3d"), (1.5, "elliptic-4d")] {
        let out = Command::new(proca).arg("run").arg(write(lambda, class)?).output()?;
        let stderr = String::from_utf8_lossy(&out.stderr);
        let ok = out.status.code() == Some(2) && stderr.contains(class);
        pass &= ok;
        parts.push(format!("lambda {lambda}: exit {:?}, names {class}: {ok}", out.status.code()));
    }
    let out = Command::new(proca).arg("run").arg(write(0.999, "near")?).output()?;
    let manifest = std::fs::read_to_string(dir.path().join("near").join("manifest.txt")).unwrap_or_default();
    let dt: f64 = manifest
        .lines()
        .find_map(|l| l.strip_prefix("# dt "))
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(f64::NAN);
    let h = 2.0 * PI / 64.0;
    let bound = 0.25 * h * (1.0f64 - 0.999).sqrt();
    let ok = out.status.success() && dt <= bound * (1.0 + 1e-12);
    pass &= ok;
    parts.push(format!("lambda 0.999: exit {:?}, dt {dt:.3e} <= {bound:.3e}: {ok}", out.status.code()));
    Ok((pass, parts.join("; ")))
}

fn a8_elliptic_solver() -> Outcome {
    let mut worst: f64 = 0.0;
    for (dim, points) in [(1, 64), (2, 32), (3, 16)] {
        let grid = GridSpec::uniform(dim, points, 2.0 * PI, StencilOrder::Second)?;
        let rhs = ScalarField::from_fn(&grid, |x| (3.0 * x[0] - 2.0 * x[1] + x[2]).cos());
        let u = solve_screened_poisson(&ScreenedPoissonProblem { rhs: rhs.clone(), mass2: 1.0 })?;
        let r = screened_poisson_residual(&u, &rhs, 1.0);
        worst = worst.max(r.norm_l2() / rhs.norm_l2());

        let n = ScalarField::constant(&grid, 1.5);
        let sol = solve_gauss_constraint(&GaussOperatorProblem::with_rhs(&n, 1.0, rhs.clone()))?;
        let r = &apply_gauss_operator(&n, 1.0, &sol.field) - &rhs;
        worst = worst.max(r.norm_l2() / rhs.norm_l2());
    }

    let grid = GridSpec::uniform(2, 64, 2.0 * PI, StencilOrder::Second)?;
    let n = ScalarField::from_fn(&grid, |x| 1.0 + 0.1 * x[0].sin() + 0.05 * (2.0 * x[1]).cos());
    let exact = ScalarField::from_fn(&grid, |x| (x[0] + 2.0 * x[1]).sin() + 0.3 * (x[0] - x[1]).cos().exp());
    let rhs = apply_gauss_operator(&n, 1.0, &exact);
    let sol = solve_gauss_constraint(&GaussOperatorProblem::with_rhs(&n, 1.0, rhs))?;
    let err = (&sol.field - &exact).norm_l2() / exact.norm_l2();
    Ok((
        worst <= 1e-12 && sol.relative_residual <= 1e-10 && err <= 1e-10,
        format!(
            "single-mode relative residual {worst:.2e}; manufactured error {err:.2e} after {} iterations",
            sol.iterations
        ),
    ))
}

fn a9_transverse_decoupling() -> Outcome {
    let grid = GridSpec::uniform(2, 128, 2.0 * PI, StencilOrder::Second)?;
    let engine = FlatEngine::new(&MediumSpec::constant(1.5, 0.5, 1.0)?, &grid)?;
    let curl = |seed: u64| -> Result<[ScalarField; 3], Box<dyn Error>> {
        let psi = random_bandlimited(seed, 8, &grid)?;
        Ok([psi.derivative(1)?, -psi.derivative(0)?, ScalarField::zeros(&grid)])
    };
    let (ai, dai) = (curl(SEED)?, curl(SEED + 1)?);
    let amplitude = ai
        .iter()
        .chain(&dai)
        .map(ScalarField::norm_l2)
        .fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    let s = engine.init_from_free_data(ai, dai)?;
    engine.evolve_observed(&s, 1.0, engine.max_dt(), 0, false, |_, s| {
        worst = worst.max(s.a0.norm_l2()).max(s.phi.norm_l2());
        Ok(())
    })?;
    let ratio = worst / amplitude;
    Ok((ratio < 1e-8, format!("max(|A0|, |phi|) / amplitude = {ratio:.2e}")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("A1", "constraint propagation", a1_constraint_propagation),
        ("A2", "transverse dispersion", a2_transverse_dispersion),
        ("A3", "longitudinal dispersion", a3_longitudinal_dispersion),
        ("A4", "cross-engine equivalence", a4_cross_engine),
        ("A5", "field-equation residual", a5_field_equation_residual),
        ("A6", "varying-index constraints", a6_gordon_varying_index),
        ("A7", "hyperbolicity gate", a7_hyperbolicity_gate),
        ("A8", "elliptic solver", a8_elliptic_solver),
        ("A9", "transverse decoupling", a9_transverse_decoupling),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !pass {
            failed += 1;
        }
        println!("{id} {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
