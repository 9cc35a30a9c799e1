use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use mmot_bench::{anticorrelated, exchangeable_pair, product_pair, torus_kernel, transport_problem};
use mmot_core::fourier::{dft, direct_bilinear, plancherel_bilinear_sampled};
use mmot_core::lp::solve_exact;
use mmot_core::mmot::{direct_lp, solve_mmot, Formulation};
use mmot_core::representability::is_n_representable;

fn transport_ladder(c: &mut Criterion) {
    let mut group = c.benchmark_group("mmot");
    for (m, n) in [(2, 4), (2, 10), (3, 6), (4, 6), (5, 5)] {
        let p = transport_problem(m, n);
        group.bench_with_input(BenchmarkId::new("direct", format!("m{m}_n{n}")), &p, |b, p| {
            b.iter(|| solve_mmot(black_box(p)).unwrap())
        });
        let r = p.clone().with_formulation(Formulation::Reduced);
        group.bench_with_input(BenchmarkId::new("reduced", format!("m{m}_n{n}")), &r, |b, p| {
            b.iter(|| solve_mmot(black_box(p)).unwrap())
        });
    }
    let small = direct_lp(&transport_problem(2, 4)).unwrap();
    group.bench_function("exact_m2_n4", |b| b.iter(|| solve_exact(black_box(&small)).unwrap()));
    group.finish();
}

fn representability(c: &mut Criterion) {
    let mut group = c.benchmark_group("representability");
    let anti = anticorrelated();
    group.bench_function("anticorrelated_n3", |b| b.iter(|| is_n_representable(black_box(&anti), 3).unwrap()));
    for (m, n) in [(3, 4), (3, 8), (4, 6)] {
        let pair = product_pair(m);
        group.bench_with_input(BenchmarkId::new("product", format!("m{m}_n{n}")), &pair, |b, pair| {
            b.iter(|| is_n_representable(black_box(pair), n).unwrap())
        });
        let pair = exchangeable_pair(m, n);
        group.bench_with_input(BenchmarkId::new("exchangeable", format!("m{m}_n{n}")), &pair, |b, pair| {
            b.iter(|| is_n_representable(black_box(pair), n).unwrap())
        });
    }
    group.finish();
}

fn fourier(c: &mut Criterion) {
    let mut group = c.benchmark_group("fourier");
    for (d, m) in [(1, 256), (1, 4096), (2, 64), (3, 16)] {
        let (torus, kernel) = torus_kernel(d, m);
        group.bench_with_input(BenchmarkId::new("dft", format!("d{d}_m{m}")), &kernel, |b, k| {
            b.iter(|| dft(&torus, black_box(k)))
        });
    }
    let (torus, kernel) = torus_kernel(1, 256);
    let a: Vec<f64> = (0..torus.len()).map(|i| ((i * 7) % 13) as f64 / 13.0).collect();
    group.bench_function("plancherel_m256", |b| {
        b.iter(|| plancherel_bilinear_sampled(&torus, &kernel, black_box(&a), &a).unwrap())
    });
    group.bench_function("direct_sum_m256", |b| b.iter(|| direct_bilinear(&torus, &kernel, black_box(&a), &a)));
    group.finish();
}

criterion_group!(benches, transport_ladder, representability, fourier);
criterion_main!(benches);
