use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use std::hint::black_box;

use nqp_core::optim::GeneticConfig;
use nqp_core::{
    optimize_superposition_bounds, quasiprobability_point, superposition_expectation,
    witness_coefficients, BoundsConfig, CoherentSuperposition, Direction, StateDescriptor,
};

fn coefficients(c: &mut Criterion) {
    c.bench_function("witness_coefficients w=2.2 n<=200", |b| {
        b.iter(|| witness_coefficients(black_box(2.2), 200).unwrap())
    });
}

fn point(c: &mut Criterion) {
    let s = witness_coefficients(2.0, 200).unwrap();
    let psi = "pasv:3:0.1"
        .parse::<StateDescriptor>()
        .unwrap()
        .build()
        .unwrap();
    let alpha = Complex64::new(0.4, -0.2);
    c.bench_function("quasiprobability_point pasv:3", |b| {
        b.iter(|| quasiprobability_point(&psi, &s, black_box(alpha)).unwrap())
    });
}

fn superposition(c: &mut Criterion) {
    let z = Complex64::new;
    let psi = CoherentSuperposition::new(
        vec![z(1.0, 0.0), z(-0.5, 0.3), z(0.2, 0.7), z(0.1, -0.4)],
        vec![z(1.1, 0.0), z(-0.9, 0.4), z(0.3, -1.2), z(0.0, 0.8)],
    )
    .unwrap()
    .normalized()
    .unwrap();
    c.bench_function("superposition_expectation r=4", |b| {
        b.iter(|| superposition_expectation(black_box(&psi), 2.2).unwrap())
    });
}

fn genetic(c: &mut Criterion) {
    let config = BoundsConfig {
        genetic: GeneticConfig {
            population: 40,
            generations: 30,
            restarts: 1,
            ..GeneticConfig::default()
        },
        include_gaussian: false,
        ..BoundsConfig::default()
    };
    let mut group = c.benchmark_group("optimizer");
    group.sample_size(10);
    group.bench_function("M2 upper bound, small search", |b| {
        b.iter(|| {
            optimize_superposition_bounds(2, black_box(1.9), Direction::Max, &config).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, coefficients, point, superposition, genetic);
criterion_main!(benches);
