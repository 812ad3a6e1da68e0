use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use k4frac::certify::{certify_sign_chain, threshold_polynomial};
use k4frac::nlp::{chain_inequality_check, run_chain_suite, ChainConfig};
use k4frac::optimize::{grid_search, SearchConfig};
use k4frac::rational::int;
use k4frac::ProgramId;
use k4frac_bench::{sample_batch, threshold_d};

fn pairs(c: &mut Criterion) {
    use ProgramId::*;
    let d = threshold_d();
    for pair in [(P3, P4), (P6, P7), (P7, P8), (P11, P12)] {
        let batch = sample_batch(pair.0, &d, 64);
        c.bench_function(&format!("pair/{}-{}", pair.0, pair.1), |b| {
            b.iter(|| {
                for pt in &batch {
                    black_box(chain_inequality_check(pair, pt, &d).unwrap());
                }
            })
        });
    }
}

fn suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("suite");
    group.sample_size(10);
    let cfg = ChainConfig { samples: 50, ..ChainConfig::default() };
    group.bench_function("16 checks x 50 samples", |b| b.iter(|| run_chain_suite(black_box(&cfg))));
    group.finish();
}

fn certificate(c: &mut Criterion) {
    let d = threshold_d();
    let w = threshold_polynomial();
    c.bench_function("certify [0, 2/33]", |b| b.iter(|| certify_sign_chain(&int(0), black_box(&d)).unwrap()));
    c.bench_function("W(2/33)", |b| b.iter(|| w.eval(black_box(&d))));
}

fn optimizer(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid");
    group.sample_size(10);
    for p in [ProgramId::P11, ProgramId::P12] {
        let cfg = SearchConfig { resolution: 200, ..SearchConfig::new(p, threshold_d()) };
        group.bench_function(p.to_string(), |b| b.iter(|| grid_search(black_box(&cfg)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, pairs, suite, certificate, optimizer);
criterion_main!(benches);
