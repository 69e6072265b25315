use std::f64::consts::PI;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use proca_core::elliptic::{solve_gauss_constraint, solve_screened_poisson, GaussOperatorProblem, ScreenedPoissonProblem};
use proca_core::grid::random_bandlimited;
use proca_core::integrator::System;
use proca_core::{FlatEngine, GordonEngine, GridSpec, MediumSpec, RefractiveIndex, ScalarField, StencilOrder};

fn grid(dim: usize, points: usize) -> GridSpec {
    GridSpec::uniform(dim, points, 2.0 * PI, StencilOrder::Second).unwrap()
}

fn free_data(g: &GridSpec) -> ([ScalarField; 3], [ScalarField; 3]) {
    let f = |k| random_bandlimited(k, 8, g).unwrap();
    ([f(0), f(1), f(2)], [f(3), f(4), f(5)])
}

fn laplacian(c: &mut Criterion) {
    let mut group = c.benchmark_group("laplacian");
    for (dim, points) in [(1, 4096), (2, 256), (3, 64)] {
        let f = random_bandlimited(1, 8, &grid(dim, points)).unwrap();
        group.bench_with_input(BenchmarkId::new(format!("{dim}d"), points), &f, |b, f| {
            b.iter(|| black_box(f.laplacian()))
        });
    }
    group.finish();
}

fn elliptic(c: &mut Criterion) {
    let g = grid(2, 128);
    let rhs = random_bandlimited(2, 8, &g).unwrap();
    c.bench_function("screened_poisson/2d/128", |b| {
        b.iter(|| {
            solve_screened_poisson(&ScreenedPoissonProblem {
                rhs: rhs.clone(),
                mass2: 1.0,
            })
            .unwrap()
        })
    });
    let n = ScalarField::from_fn(&g, |x| 1.0 + 0.1 * x[0].sin());
    let problem = GaussOperatorProblem::with_rhs(&n, 1.0, rhs.clone());
    c.bench_function("gauss_pcg/2d/128", |b| b.iter(|| solve_gauss_constraint(&problem).unwrap()));
}

fn steps(c: &mut Criterion) {
    let g = grid(2, 128);
    let (ai, dai) = free_data(&g);

    let flat = FlatEngine::new(&MediumSpec::constant(1.5, 0.5, 1.0).unwrap(), &g).unwrap();
    let s = flat.init_from_free_data(ai.clone(), dai.clone()).unwrap();
    let dt = flat.max_dt();
    c.bench_function("flat_step/2d/128", |b| b.iter(|| flat.step(&s, dt).unwrap()));

    let n = ScalarField::from_fn(&g, |x| 1.0 + 0.1 * x[0].sin());
    let medium = MediumSpec::gordon(RefractiveIndex::Field(n), 1.0).unwrap();
    let gordon = GordonEngine::new(&medium, &g).unwrap();
    let s = gordon.init_from_free_data(ai, dai).unwrap();
    let dt = gordon.max_dt();
    c.bench_function("gordon_step/2d/128", |b| b.iter(|| gordon.step(&s, dt).unwrap()));
}

criterion_group!(benches, laplacian, elliptic, steps);
criterion_main!(benches);
