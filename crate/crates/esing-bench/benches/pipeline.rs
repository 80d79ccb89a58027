//! Timings of the main pipeline stages on representative corpus curves.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use esing::corpus::{self, CorpusEntry};
use esing::{localalg, resolve, semiuniversal_family, strata, t1_es_suite, BiSeries};

fn curves() -> Vec<(String, BiSeries)> {
    let mut entries: Vec<CorpusEntry> = ["A4/char0", "E8/char2", "D5/char5"]
        .iter()
        .map(|n| corpus::ade().into_iter().find(|e| e.name == *n).unwrap())
        .collect();
    entries.push(corpus::two_p_curve(2));
    entries.push(corpus::quartic_char_two());
    entries.push(corpus::wild_branch(3));
    entries.push(corpus::line_and_branch(3, 2));
    entries.into_iter().map(|e| (e.name.clone(), e.parse().unwrap().equation().unwrap())).collect()
}

fn bench_resolve(c: &mut Criterion) {
    let mut g = c.benchmark_group("resolve");
    for (name, f) in curves() {
        g.bench_with_input(BenchmarkId::from_parameter(&name), &f, |b, f| b.iter(|| resolve(black_box(f)).unwrap()));
    }
    g.finish();
}

fn bench_tjurina(c: &mut Criterion) {
    let mut g = c.benchmark_group("tjurina");
    for (name, f) in curves() {
        let gens = vec![f.clone(), f.derivative_x(), f.derivative_y()];
        g.bench_with_input(BenchmarkId::from_parameter(&name), &gens, |b, gens| {
            b.iter(|| localalg::quotient_dim(black_box(gens), None).unwrap())
        });
    }
    g.finish();
}

fn bench_tangent(c: &mut Criterion) {
    let mut g = c.benchmark_group("tangent_suite");
    g.sample_size(10);
    for (name, f) in curves() {
        g.bench_with_input(BenchmarkId::from_parameter(&name), &f, |b, f| b.iter(|| t1_es_suite(black_box(f)).unwrap()));
    }
    g.finish();
}

fn bench_stratum(c: &mut Criterion) {
    let mut g = c.benchmark_group("stratum");
    g.sample_size(10);
    for (name, f) in curves() {
        let fam = semiuniversal_family(&f).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(&name), &fam, |b, fam| {
            b.iter(|| strata::wes_conditions(black_box(fam), 3).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_resolve, bench_tjurina, bench_tangent, bench_stratum);
criterion_main!(benches);
