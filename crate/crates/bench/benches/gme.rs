use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use upb_bench::quarter_rho;
use upb_core::gme::{grid_oracle, symmetric_slice_grid};
use upb_core::{seesaw_maximize, CoarsePartition, PartyLayout, SeesawOptions};

fn seesaw(c: &mut Criterion) {
    let rho = quarter_rho();
    let layout = PartyLayout::qubits(4);
    let mut group = c.benchmark_group("seesaw_64_restarts");
    group.sample_size(20);
    for cut in ["A|B|C|D", "A|B|CD", "AB|CD"] {
        let p = CoarsePartition::parse(cut, &layout).unwrap();
        group.bench_function(cut, |b| {
            b.iter(|| seesaw_maximize(black_box(&rho), &p, &SeesawOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn oracles(c: &mut Criterion) {
    let rho = quarter_rho();
    c.bench_function("symmetric_slice_grid/720", |b| b.iter(|| symmetric_slice_grid(black_box(&rho), 720).unwrap()));
    let p = CoarsePartition::parse("AB|CD", &PartyLayout::qubits(4)).unwrap();
    let mut group = c.benchmark_group("grid_oracle");
    group.sample_size(10);
    group.bench_function("AB|CD/4", |b| b.iter(|| grid_oracle(black_box(&rho), &p, 4).unwrap()));
    group.finish();
}

criterion_group!(benches, seesaw, oracles);
criterion_main!(benches);
