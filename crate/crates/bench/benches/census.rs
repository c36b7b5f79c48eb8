use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ptlab_core::density::{four_profile_fast, four_profile_reference};
use ptlab_core::graph::random_graph;
use ptlab_core::iso::SmallGraphClass;
use std::hint::black_box;

fn census(c: &mut Criterion) {
    let mut group = c.benchmark_group("four_profile");
    for n in [16usize, 32, 64] {
        let g = random_graph(n, 1);
        group.bench_with_input(BenchmarkId::new("reference", n), &g, |b, g| {
            b.iter(|| four_profile_reference(black_box(g)))
        });
        group.bench_with_input(BenchmarkId::new("fast", n), &g, |b, g| b.iter(|| four_profile_fast(black_box(g))));
    }
    for n in [256usize, 1024] {
        let g = random_graph(n, 1);
        group.bench_with_input(BenchmarkId::new("fast", n), &g, |b, g| b.iter(|| four_profile_fast(black_box(g))));
    }
    group.finish();
}

fn generation(c: &mut Criterion) {
    c.bench_function("random_graph/1024", |b| b.iter(|| random_graph(black_box(1024), 7)));
}

fn canonical(c: &mut Criterion) {
    let graphs: Vec<_> = (0..64).map(|s| random_graph(8, s)).collect();
    c.bench_function("canonical_form/order8", |b| {
        b.iter(|| {
            for g in &graphs {
                black_box(SmallGraphClass::of(g).unwrap());
            }
        })
    });
}

criterion_group!(benches, census, generation, canonical);
criterion_main!(benches);
