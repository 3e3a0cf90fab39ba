//! Sequential versus data-parallel execution of the two batch workloads.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mechdock_core::exec::Exec;
use mechdock_core::forge::{bounds_sweep, SearchRange};
use mechdock_core::mechlib::open;
use mechdock_core::wmon::{fuzz, FuzzSpec};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn bench_fuzz(c: &mut Criterion) {
    let mech = open("optmakespan").expect("builtin");
    let spec = FuzzSpec { n: 3, m: 3, lo: 0, hi: 5 };
    let mut group = c.benchmark_group("wmon_fuzz");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| fuzz(&mech, &spec, 2_000, 0, exec).expect("fuzz"))
        });
    }
    group.finish();
}

fn bench_bounds(c: &mut Criterion) {
    let rs = [3, 4, 5, 10];
    let range = SearchRange::default();
    let mut group = c.benchmark_group("bounds_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| bounds_sweep(&rs, None, Some(&range), exec).expect("sweep"))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_fuzz, bench_bounds);
criterion_main!(benches);
