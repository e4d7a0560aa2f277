use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use psoframe::{
    enumerate_faults, fault_simulate_parallel, fault_simulate_serial, SimMode, SimOptions,
};
use psoframe_bench::{medium, s27, vectors};

fn fault_sim(c: &mut Criterion) {
    let mut group = c.benchmark_group("fault_sim");
    group.sample_size(20);
    for (name, circuit, n) in [("s27", s27(), 256), ("random300", medium(), 64)] {
        let faults = enumerate_faults(&circuit, false);
        let v = vectors(&circuit, n);
        for mode in [SimMode::Scan, SimMode::Functional] {
            let opts = SimOptions {
                mode,
                ..Default::default()
            };
            let id = format!("{name}/{mode}");
            group.bench_with_input(BenchmarkId::new("serial", &id), &v, |b, v| {
                b.iter(|| fault_simulate_serial(&circuit, v, &faults, opts).unwrap())
            });
            group.bench_with_input(BenchmarkId::new("parallel", &id), &v, |b, v| {
                b.iter(|| fault_simulate_parallel(&circuit, v, &faults, opts).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, fault_sim);
criterion_main!(benches);
