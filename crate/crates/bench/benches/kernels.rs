use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use geoscat::spectral::enumerate_modes;
use geoscat::transport::current;
use geoscat::{
    BathPair, CouplingParams, GreensConfig, Junctions, PairKernel, Point, QuadConfig,
    ResonatorGeometry, Scatterer,
};

fn triangle_case() -> (ResonatorGeometry, Junctions) {
    let g = ResonatorGeometry::triangle();
    let j = Junctions::new(&g, Point::new(0.1, 0.2), Point::new(1.0, 5.0 / 3f64.sqrt())).unwrap();
    (g, j)
}

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_modes");
    group.sample_size(10);
    let rect = ResonatorGeometry::rectangle(2.0, 1.0).unwrap();
    let tri = ResonatorGeometry::triangle();
    for cutoff in [1e4, 1e5] {
        group.bench_with_input(BenchmarkId::new("rectangle", cutoff), &cutoff, |b, &l| {
            b.iter(|| enumerate_modes(&rect, l).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("triangle", cutoff), &cutoff, |b, &l| {
            b.iter(|| enumerate_modes(&tri, l).unwrap())
        });
    }
    group.finish();
}

fn kernel(c: &mut Criterion) {
    let (g, j) = triangle_case();
    let mut group = c.benchmark_group("pair_kernel");
    for cutoff in [1e4, 1e5] {
        let table = enumerate_modes(&g, cutoff).unwrap();
        let k = PairKernel::new(&table, &j, &GreensConfig::with_cutoff(cutoff)).unwrap();
        group.bench_with_input(BenchmarkId::new("quantities", cutoff), &k, |b, k| {
            b.iter(|| k.quantities(black_box(17.3), [0.0, 0.0]).unwrap())
        });
    }
    group.finish();
}

fn transport(c: &mut Criterion) {
    let (g, j) = triangle_case();
    let table = enumerate_modes(&g, 1e4).unwrap();
    let s = Scatterer::new(
        &table,
        &j,
        CouplingParams::natural(0.05).unwrap(),
        &GreensConfig::with_cutoff(1e4),
    )
    .unwrap();
    let quad = QuadConfig::default();
    let mut group = c.benchmark_group("current");
    group.sample_size(10);
    for mu1 in [5.0, 15.0] {
        let baths = BathPair::new(25.0, mu1, mu1 + 2.0, 0.0).unwrap();
        group.bench_with_input(BenchmarkId::new("beta25_V2", mu1), &baths, |b, baths| {
            b.iter(|| current(&s, baths, &quad).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, enumeration, kernel, transport);
criterion_main!(benches);
