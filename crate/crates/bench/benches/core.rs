use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dpsqkd_core::protocol::{estimate_statistics, exact_count_distribution, simulate_run};
use dpsqkd_core::{
    gaussian_limit, optimize_alpha, random_joint_state, theorem_lhs, von_neumann_entropy,
    OverlapConvention,
};

fn entropy(c: &mut Criterion) {
    let mut group = c.benchmark_group("von_neumann_entropy");
    for qubits in [2usize, 4, 5] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_joint_state(&vec![2; qubits - 1], 2, 4, &mut rng).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(1 << qubits), &rho, |b, rho| {
            b.iter(|| von_neumann_entropy(black_box(rho)).unwrap())
        });
    }
    group.finish();

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rho = random_joint_state(&[2; 4], 2, 4, &mut rng).unwrap();
    c.bench_function("theorem_lhs n=4 m=2", |b| {
        b.iter(|| theorem_lhs(black_box(&rho), 4, 2).unwrap())
    });
}

fn keyrate(c: &mut Criterion) {
    c.bench_function("optimize_alpha", |b| {
        b.iter(|| optimize_alpha(black_box(1.0), OverlapConvention::Paper).unwrap())
    });
    let mut group = c.benchmark_group("gaussian_limit");
    for n in [1_000usize, 10_000, 100_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| gaussian_limit(0.338, 1.0, n, OverlapConvention::Paper).unwrap())
        });
    }
    group.finish();
    c.bench_function("exact_count_distribution N=1e5", |b| {
        b.iter(|| exact_count_distribution(black_box(100_000), 0.108).unwrap())
    });
}

fn protocol(c: &mut Criterion) {
    let mut group = c.benchmark_group("protocol");
    group.sample_size(10);
    group.bench_function("simulate_run N=50 x 1e4", |b| {
        b.iter(|| simulate_run(50, 10_000, 0.05f64.sqrt(), 1.0, black_box(7)).unwrap())
    });
    let blocks = simulate_run(50, 10_000, 0.05f64.sqrt(), 1.0, 7).unwrap();
    group.bench_function("estimate_statistics N=50 x 1e4", |b| {
        b.iter(|| estimate_statistics(black_box(&blocks), 0.1, 7).unwrap())
    });
    group.finish();
}

criterion_group!(benches, entropy, keyrate, protocol);
criterion_main!(benches);
