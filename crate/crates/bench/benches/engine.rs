use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use iwasawa_bench::engine;
use iwasawa_core::kernel_verify::{commutator_series, enumerate_cases, CaseTag};
use iwasawa_core::normality::{candidate_catalog, diagram_chase, normal_obstruction, synthetic_instance};
use iwasawa_core::{element_to_series, lazard_coordinates, IwasawaSeries, RootSystem, SeriesAlgebra};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_product(alg: &SeriesAlgebra, rng: &mut ChaCha8Rng) -> IwasawaSeries {
    let n = alg.nvars();
    let mut acc = alg.one();
    for _ in 0..4 {
        let term = alg.one().add(&alg.variable(rng.gen_range(0..n))).unwrap();
        acc = alg.multiply(&acc, &term).unwrap();
    }
    acc
}

fn series_multiply(c: &mut Criterion) {
    let mut group = c.benchmark_group("series_multiply");
    for (label, p, d) in [("A1", 3u64, 9u32), ("A2", 3, 8), ("B2", 5, 6)] {
        let (_, _, alg) = engine(label, p, d);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_product(&alg, &mut rng);
        let b = random_product(&alg, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{label}-p{p}-D{d}")), &(a, b), |bench, (a, b)| {
            bench.iter(|| alg.multiply(black_box(a), black_box(b)).unwrap())
        });
    }
    group.finish();
}

fn matrix_to_series(c: &mut Criterion) {
    let (_, model, _) = engine("A2", 3, 8);
    let g = model.from_coordinates(&[1, 2, 0, 1, 2, 1, 0, 2]).unwrap();
    c.bench_function("lazard_coordinates/A2-p3", |b| b.iter(|| lazard_coordinates(&model, black_box(&g)).unwrap()));
    c.bench_function("element_to_series/A2-p3-D8", |b| b.iter(|| element_to_series(&model, black_box(&g), 8).unwrap()));
}

fn commutator_oracle(c: &mut Criterion) {
    let rs = RootSystem::from_label("G2").unwrap();
    let (_, model, _) = engine("G2", 5, 25);
    let case = enumerate_cases(&rs, CaseTag::SumIsRoot, 0, 0).into_iter().next().unwrap();
    let a = case.first_variable(&rs);
    let b = case.second_variable(&rs);
    c.bench_function("commutator_series/G2-p5", |bench| {
        bench.iter(|| commutator_series(&model, a, 0, b, 0, 25).unwrap())
    });
}

fn obstruction(c: &mut Criterion) {
    let (_, _, alg) = engine("A2", 3, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let catalog = candidate_catalog(alg.context(), 8, 4, &mut rng);
    c.bench_function("normal_obstruction/A2-p3-catalog", |b| {
        b.iter(|| {
            for (_, w) in &catalog {
                black_box(normal_obstruction(&alg, w, 8).unwrap());
            }
        })
    });
}

fn chase(c: &mut Criterion) {
    let mut group = c.benchmark_group("diagram_chase");
    for (label, p) in [("A3", 3u64), ("E6", 5)] {
        let rs = RootSystem::from_label(label).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = synthetic_instance(&rs, p, 0, 3, &mut rng).unwrap();
        group.sample_size(10);
        group.bench_function(BenchmarkId::from_parameter(format!("{label}-p{p}")), |b| {
            b.iter(|| diagram_chase(&rs, &inst.w_m, &inst.w_d, 0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, series_multiply, matrix_to_series, commutator_oracle, obstruction, chase);
criterion_main!(benches);
