use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use corrseq::correlation::{corr_factorized, BruteCorrelator, BruteOptions};
use corrseq::eta::{sample_eta, synthetic_eta};
use corrseq::nets::{dft_sup_correlation, Complex};
use corrseq::rng::RngKind;
use corrseq::sparsity::enumerate_s;
use corrseq::RadixBasis;
use num_bigint::BigUint;

fn correlators(c: &mut Criterion) {
    let b = RadixBasis::default_shifted(20).unwrap();
    let d = BigUint::from(336u32);
    for k in [3usize, 4] {
        let set = enumerate_s(&b, b.prefix(k)).unwrap();
        let eta = sample_eta(RngKind::ChaCha8, 1, &set);
        let brute = BruteCorrelator::new(&b, k, &eta, BruteOptions::default()).unwrap();
        c.bench_function(&format!("brute k={k}"), |bench| {
            bench.iter(|| brute.raw_sum(black_box(&d)))
        });
    }
    let set = enumerate_s(&b, b.prefix(12)).unwrap();
    let eta = sample_eta(RngKind::ChaCha8, 1, &set);
    c.bench_function("factorized k=12", |bench| {
        bench.iter(|| corr_factorized(&b, 12, black_box(&d), &eta).unwrap())
    });
}

fn sweeps(c: &mut Criterion) {
    let w: Vec<Complex> = synthetic_eta(RngKind::ChaCha8, 9, 100_000)
        .iter()
        .map(|e| Complex::new(e.as_f64(), 0.0))
        .collect();
    let mut g = c.benchmark_group("dft");
    g.sample_size(10);
    g.bench_function("sup m=1e5 grid=2^18", |bench| {
        bench.iter(|| dft_sup_correlation(black_box(&w), 1 << 18).unwrap())
    });
    g.finish();
}

fn sumset(c: &mut Criterion) {
    let b = RadixBasis::default_shifted(20).unwrap();
    c.bench_function("enumerate_s K=19", |bench| {
        bench.iter(|| enumerate_s(&b, black_box(b.prefix(19))).unwrap())
    });
}

criterion_group!(benches, correlators, sweeps, sumset);
criterion_main!(benches);
