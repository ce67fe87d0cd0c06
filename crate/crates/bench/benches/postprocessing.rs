use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};
use diqkd_bench::{random_bytes, DecodeFixture, ExtractFixture, KeylenFixture, GAMMA};
use diqkd_core::ec::{decode, DEFAULT_MAX_ITERS};
use diqkd_core::hashing::{au_hash, HashSeed};
use diqkd_core::keylen::{key_length, optimize_with, OptimizerConfig};
use diqkd_core::rng::seeded;
use diqkd_core::trevisan::extract;

fn bp_decode(c: &mut Criterion) {
    let mut g = c.benchmark_group("bp_decode");
    g.sample_size(10);
    for n in [20_000usize, 100_000] {
        let f = DecodeFixture::new(n, 1);
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| {
            b.iter(|| decode(&f.code, &f.b, &f.settings, &f.priors, &f.syndrome, DEFAULT_MAX_ITERS).unwrap())
        });
    }
    g.finish();
}

fn trevisan(c: &mut Criterion) {
    let mut g = c.benchmark_group("extract");
    g.sample_size(10);
    for (n, ell) in [(100_000usize, 256usize), (100_000, 4096)] {
        let f = ExtractFixture::new(n, ell, 1e-10, 3);
        g.throughput(Throughput::Elements(ell as u64));
        g.bench_with_input(BenchmarkId::new(format!("n{n}"), ell), &f, |b, f| {
            b.iter(|| extract(&f.source, &f.seed, &f.params).unwrap())
        });
    }
    g.finish();
}

fn hashing(c: &mut Criterion) {
    let mut g = c.benchmark_group("au_hash");
    let seed = HashSeed::random(&mut seeded(4));
    for len in [64usize, 4096, 1 << 20] {
        let msg = random_bytes(len, 5);
        g.throughput(Throughput::Bytes(len as u64));
        g.bench_with_input(BenchmarkId::from_parameter(len), &msg, |b, m| b.iter(|| au_hash(&seed, m).unwrap()));
    }
    g.finish();
}

fn keylen(c: &mut Criterion) {
    let f = KeylenFixture::reference_point();
    c.bench_function("key_length_eval", |b| {
        b.iter(|| key_length(f.n, GAMMA, f.omega_thresh, f.m, &f.sec).unwrap())
    });
    let mut g = c.benchmark_group("keylen_optimize");
    g.sample_size(10);
    let cfg = OptimizerConfig { starts: 4, seed: 0, max_evals: 1000 };
    g.bench_function("4_starts", |b| {
        b.iter_batched(|| cfg, |cfg| optimize_with(f.n, GAMMA, f.omega_thresh, f.m, 1e-10, cfg).unwrap(), BatchSize::SmallInput)
    });
    g.finish();
}

criterion_group!(benches, bp_decode, trevisan, hashing, keylen);
criterion_main!(benches);
