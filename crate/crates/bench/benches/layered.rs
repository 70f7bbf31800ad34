use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use layerpack::counting::{best_layered_of_order, count_bruteforce, count_layered};
use layerpack::optimizer::{maximize_fixed_k, OptConfig};
use layerpack::permuton::{density_polynomial, density_polynomial_gradient};
use layerpack::{realize, LayeredShape};

fn shape(sizes: &[usize]) -> LayeredShape {
    LayeredShape::new(sizes.to_vec()).unwrap()
}

fn counting(c: &mut Criterion) {
    let mut group = c.benchmark_group("count");
    let sigma = shape(&[2, 1, 2]);
    for layers in [8usize, 64, 512] {
        let host = shape(&vec![7; layers]);
        group.bench_with_input(BenchmarkId::new("layered", layers), &host, |b, host| {
            b.iter(|| count_layered(black_box(&sigma), black_box(host)))
        });
    }
    let host = shape(&[3, 2, 4, 1, 3, 2]);
    let (p, h) = (realize(&sigma), realize(&host));
    group.bench_function("bruteforce/15", |b| b.iter(|| count_bruteforce(black_box(&p), black_box(&h)).unwrap()));
    group.finish();
}

fn density(c: &mut Criterion) {
    let mut group = c.benchmark_group("density");
    let sigma = shape(&[13, 1, 2]);
    for k in [12usize, 100, 1000] {
        let xs: Vec<f64> = (1..=k).map(|i| i as f64 / (k * (k + 1) / 2) as f64).collect();
        group.bench_with_input(BenchmarkId::new("value", k), &xs, |b, xs| {
            b.iter(|| density_polynomial(black_box(&sigma), black_box(xs)))
        });
        group.bench_with_input(BenchmarkId::new("gradient", k), &xs, |b, xs| {
            b.iter(|| density_polynomial_gradient(black_box(&sigma), black_box(xs)))
        });
    }
    group.finish();
}

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    let sigma = shape(&[2, 2]);
    group.bench_function("compositions/16", |b| b.iter(|| best_layered_of_order(black_box(&sigma), 16).unwrap()));
    let config = OptConfig { restarts: 4, ..OptConfig::default() };
    group.bench_function("optimize/(2,1,2)/K=6", |b| {
        b.iter(|| maximize_fixed_k(black_box(&shape(&[2, 1, 2])), 6, &config).unwrap())
    });
    group.finish();
}

criterion_group!(benches, counting, density, search);
criterion_main!(benches);
