//! Sequential (one-thread pool) against data-parallel (default pool) runs
//! of the heavy kernels. Both variants execute the same code; only the pool
//! differs, so results are identical and only the time changes.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPool;
use stable_lift::interp::validate_scheme;
use stable_lift::lift::{generate_scheme, lift, LiftConfig};
use stable_lift::perm::{automorphism_group, automorphism_group_brute};
use stable_lift::stability::stability_report;
use stable_lift::structure::{relational_companion, Signature, Structure, SubsetOfDomain};

fn digraph(n: usize, edges: &[[usize; 2]]) -> Structure {
    Structure::relational(
        Signature::relational([("R", 2)]).unwrap(),
        n,
        vec![edges.iter().map(|e| e.to_vec()).collect()],
    )
    .unwrap()
}

fn cycle(n: usize) -> Structure {
    let edges: Vec<[usize; 2]> = (0..n).map(|i| [i, (i + 1) % n]).collect();
    digraph(n, &edges)
}

fn pools() -> [(&'static str, ThreadPool); 2] {
    [
        ("sequential", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", rayon::ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn brute_oracle(c: &mut Criterion) {
    let m = cycle(8);
    let mut group = c.benchmark_group("brute_oracle_degree_8");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| automorphism_group_brute(black_box(&m)).unwrap()))
        });
    }
    group.finish();
}

fn lift_automorphisms(c: &mut Criterion) {
    let n = lift(&cycle(4), &LiftConfig::new(3)).unwrap();
    let mut group = c.benchmark_group("aut_of_lift");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| automorphism_group(black_box(n.structure())).order()))
        });
    }
    group.finish();
}

fn scheme_validation(c: &mut Criterion) {
    let m = digraph(3, &[[0, 1], [1, 2], [2, 0], [0, 2]]);
    let n = lift(&m, &LiftConfig::new(2)).unwrap();
    let (s, f) = generate_scheme(&m, &n).unwrap();
    let companion = relational_companion(n.structure());
    let mut group = c.benchmark_group("validate_scheme");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| validate_scheme(&m, &companion, black_box(&s), &f).unwrap()))
        });
    }
    group.finish();
}

fn census(c: &mut Criterion) {
    let m = cycle(4);
    let params: Vec<SubsetOfDomain> = vec![SubsetOfDomain::empty(), [1].into_iter().collect()];
    let mut group = c.benchmark_group("stability_report");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| stability_report(black_box(&m), &[1, 2, 3], &params).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, brute_oracle, lift_automorphisms, scheme_validation, census);
criterion_main!(benches);
