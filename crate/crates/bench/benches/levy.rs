use conformal_kit::{levy_gauge, levy_metric};
use conformal_kit_bench::random_ecdf;
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn gauge(c: &mut Criterion) {
    let mut group = c.benchmark_group("levy");
    for &m in &[100usize, 1000, 10000] {
        let (f, g) = (random_ecdf(m, 1), random_ecdf(m, 2));
        group.bench_with_input(BenchmarkId::new("gauge", m), &m, |b, _| {
            b.iter(|| levy_gauge(&f, &g, black_box(0.1)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("metric", m), &m, |b, _| b.iter(|| levy_metric(&f, black_box(&g))));
    }
    group.finish();
}

criterion_group!(benches, gauge);
criterion_main!(benches);
