use conformal_kit::harness::parse_score;
use conformal_kit::{
    full_conformal_set, jackknife_symmetric, shortcut_closed_form, shortcut_unimodal, ConformalConfig, Predictor,
};
use conformal_kit_bench::{grid_around, linear_instance};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn full_conformal(c: &mut Criterion) {
    let mut group = c.benchmark_group("full_conformal_grid");
    group.sample_size(10);
    for &(score, n) in &[("out-sample:mean", 100), ("out-sample:ridge:1", 30), ("in-sample:knn:3", 30)] {
        let (data, new) = linear_instance(n, 1);
        let c = parse_score(score).unwrap();
        let cfg = ConformalConfig::new(0.1, 0.0, grid_around(new.response, 401));
        group.bench_with_input(BenchmarkId::new(score, n), &n, |b, _| {
            b.iter(|| full_conformal_set(&c, &data, black_box(&new.features), &cfg).unwrap())
        });
    }
    group.finish();
}

fn shortcut_paths(c: &mut Criterion) {
    let (data, new) = linear_instance(100, 2);
    let ridge = parse_score("in-sample:ridge:1").unwrap();
    c.bench_function("shortcut_closed_form/in-sample:ridge:1/100", |b| {
        b.iter(|| shortcut_closed_form(&ridge, &data, black_box(&new.features), 0.1, 0.0).unwrap())
    });
    c.bench_function("shortcut_unimodal/in-sample:ridge:1/100", |b| {
        b.iter(|| shortcut_unimodal(&ridge, &data, black_box(&new.features), 0.1, 0.0, 2f64.powi(-10), 10).unwrap())
    });
    let ols = Predictor::ols();
    c.bench_function("jackknife/ols/100", |b| {
        b.iter(|| jackknife_symmetric(&ols, &data, black_box(&new.features), 0.1, 0.0).unwrap())
    });
}

criterion_group!(benches, full_conformal, shortcut_paths);
criterion_main!(benches);
