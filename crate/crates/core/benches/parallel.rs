//! Sequential-versus-parallel throughput of the three hot kernels: ensemble
//! synthesis, the Hölder pair scan, and the vector fractional integral.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fbm_lattice::fbm::{sample_noise_opt, NoiseConfig};
use fbm_lattice::holder::weighted_norms_opt;
use fbm_lattice::young::{vector_fractional_opt, ExponentChain, OperatorPath};

fn label(parallel: bool) -> &'static str {
    if parallel {
        "parallel"
    } else {
        "sequential"
    }
}

fn noise_synthesis(c: &mut Criterion) {
    let config = NoiseConfig::new(0.75, vec![1.0; 256], 1.0, 1.0 / 1024.0, 7);
    let mut group = c.benchmark_group("noise_synthesis");
    group.sample_size(10);
    for parallel in [false, true] {
        group.bench_with_input(
            BenchmarkId::from_parameter(label(parallel)),
            &parallel,
            |b, &p| b.iter(|| sample_noise_opt(p, &config).unwrap()),
        );
    }
    group.finish();
}

fn holder_pair_scan(c: &mut Criterion) {
    let noise = sample_noise_opt(
        true,
        &NoiseConfig::new(0.75, vec![0.5; 16], 1.0, 1.0 / 1024.0, 11),
    )
    .unwrap();
    let mut group = c.benchmark_group("holder_pair_scan");
    for parallel in [false, true] {
        group.bench_with_input(
            BenchmarkId::from_parameter(label(parallel)),
            &parallel,
            |b, &p| b.iter(|| weighted_norms_opt(p, &noise.path, 7.0 / 12.0, 1.0).unwrap()),
        );
    }
    group.finish();
}

fn vector_fractional(c: &mut Criterion) {
    let chain = ExponentChain::from_hurst(0.75).unwrap();
    let n = 32;
    let driver = sample_noise_opt(
        true,
        &NoiseConfig::new(0.75, vec![1.0; n], 1.0, 1.0 / 256.0, 13),
    )
    .unwrap();
    let diagonal = sample_noise_opt(
        true,
        &NoiseConfig::new(0.75, vec![0.5; n], 1.0, 1.0 / 256.0, 14),
    )
    .unwrap();
    let zop = OperatorPath::Diagonal(diagonal.path);
    let mut group = c.benchmark_group("vector_fractional");
    group.sample_size(10);
    for parallel in [false, true] {
        group.bench_with_input(
            BenchmarkId::from_parameter(label(parallel)),
            &parallel,
            |b, &p| {
                b.iter(|| {
                    vector_fractional_opt(p, &zop, &driver.path, chain.alpha, 0.0, 1.0, 1e-6)
                        .unwrap()
                })
            },
        );
    }
    group.finish();
}

criterion_group!(benches, noise_synthesis, holder_pair_scan, vector_fractional);
criterion_main!(benches);
