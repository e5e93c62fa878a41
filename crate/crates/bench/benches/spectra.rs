use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fermitherm::gradients::{commutator_blocks, GradientKind};
use fermitherm::norms::{gradient_schatten, singular_spectrum};
use fermitherm::shells::build_shell_table;
use fermitherm::thermal::{solve_chemical_potential, ModelParams};
use std::hint::black_box;

fn fixture(d: usize, k: usize) -> fermitherm::GradientBlocks {
    let params = ModelParams::new(d, 0.1, 1.0, 1.0).unwrap();
    let shells = build_shell_table(d, 0.1, k).unwrap();
    let prof = solve_chemical_potential(&params, &shells).unwrap();
    commutator_blocks(&prof, &shells, GradientKind::Position).unwrap()
}

fn bench_fast_norms(c: &mut Criterion) {
    let mut group = c.benchmark_group("gradient_schatten_fast");
    for d in [1usize, 3] {
        let gb = fixture(d, 2048);
        for p in [2.0, 4.0, f64::INFINITY] {
            group.bench_function(BenchmarkId::from_parameter(format!("d{d}_p{p}")), |b| {
                b.iter(|| gradient_schatten(black_box(&gb), black_box(p)).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_full_spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("singular_spectrum_ql");
    group.sample_size(10);
    for (d, k) in [(1usize, 2048usize), (2, 256)] {
        let gb = fixture(d, k);
        group.bench_function(BenchmarkId::from_parameter(format!("d{d}_K{k}")), |b| {
            b.iter(|| singular_spectrum(black_box(&gb)).unwrap())
        });
    }
    group.finish();
}

fn bench_dense_oracle(c: &mut Criterion) {
    let params = ModelParams::new(2, 0.4, 1.0, 1.0).unwrap();
    let shells = build_shell_table(2, 0.4, 24).unwrap();
    let prof = solve_chemical_potential(&params, &shells).unwrap();
    let basis = fermitherm::shells::GradedBasis::new(2, 24).unwrap();
    c.bench_function("dense_oracle_gradient_d2_K24", |b| {
        b.iter(|| {
            fermitherm::oracle::dense_gradient(
                black_box(&prof),
                black_box(&basis),
                GradientKind::Position,
                0,
                4000,
            )
            .unwrap()
            .singular_values()
        })
    });
}

criterion_group!(benches, bench_fast_norms, bench_full_spectrum, bench_dense_oracle);
criterion_main!(benches);
