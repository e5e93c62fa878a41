use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fermitherm::thermal::{
    partition_spectral, shells_for, solve_chemical_potential, ModelParams, StateKind,
};
use std::hint::black_box;

fn bench_mu_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("mu_solve");
    for (label, d, beta, hbar) in [("shallow", 1usize, 4.0, 0.5), ("deep", 3usize, 0.25, 0.02)] {
        let params = ModelParams::new(d, hbar, beta, 1.0).unwrap();
        let shells = shells_for(&params, StateKind::FermiDirac, 0).unwrap();
        group.bench_function(BenchmarkId::from_parameter(format!("{label}_K{}", shells.cutoff)), |b| {
            b.iter(|| solve_chemical_potential(black_box(&params), black_box(&shells)).unwrap())
        });
    }
    group.finish();
}

fn bench_partition(c: &mut Criterion) {
    let params = ModelParams::new(2, 0.1, 0.5, 1.0).unwrap();
    let shells = shells_for(&params, StateKind::MaxwellBoltzmann, 0).unwrap();
    c.bench_function("partition_spectral", |b| {
        b.iter(|| partition_spectral(black_box(&shells), black_box(0.5)))
    });
}

fn bench_cutoff_policy(c: &mut Criterion) {
    let params = ModelParams::new(3, 0.02, 0.25, std::f64::consts::TAU).unwrap();
    c.bench_function("choose_cutoff_deep", |b| {
        b.iter(|| {
            fermitherm::thermal::choose_cutoff(black_box(&params), StateKind::FermiDirac, 0)
                .unwrap()
        })
    });
}

criterion_group!(benches, bench_mu_solve, bench_partition, bench_cutoff_policy);
criterion_main!(benches);
