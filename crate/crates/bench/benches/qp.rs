use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use willmore_core::energy::normalization_c;
use willmore_core::mesh::{
    build_topology, incidence_and_weights, random_flipped_triangulation, random_inscribed,
};
use willmore_core::qp::{abstract_angles, check_realizability, solve_inequality_qp};
use willmore_core::Vec3;

fn programs(c: &mut Criterion) {
    let mut group = c.benchmark_group("qp");
    for n in [12, 100, 400, 1000] {
        let mesh = random_inscribed(n, Vec3::new(1.0, 1.0, 1.0), 2).unwrap();
        let graph = incidence_and_weights(&build_topology(&mesh).unwrap()).unwrap();
        group.bench_with_input(BenchmarkId::new("normalization", n), &n, |b, _| {
            b.iter(|| normalization_c(&graph).unwrap())
        });
        group.bench_with_input(
            BenchmarkId::new("abstract-angles-weighted", n),
            &n,
            |b, _| b.iter(|| abstract_angles(&graph, true).unwrap()),
        );
    }
    for n in [10, 40] {
        let mesh = random_flipped_triangulation(n, 4 * n, 3).unwrap();
        let topo = build_topology(&mesh).unwrap();
        let graph = incidence_and_weights(&topo).unwrap();
        group.bench_with_input(BenchmarkId::new("inequality", n), &n, |b, _| {
            b.iter(|| solve_inequality_qp(&graph, false).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("realizability", n), &n, |b, _| {
            b.iter(|| check_realizability(&topo, false).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, programs);
criterion_main!(benches);
