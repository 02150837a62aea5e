use std::hint::black_box;

use collider_lab::monte_carlo::{estimate_both, SimConfig};
use collider_lab::sweep::{find_figure, run_sweep_with};
use collider_lab::{ButterflyScenario, Execution, Scenario};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn sweep(c: &mut Criterion) {
    let grid = find_figure("fig5b", 300).unwrap().grid;
    let mut group = c.benchmark_group("sweep_fig5b_300x300");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_sweep_with(black_box(&grid), exec).unwrap())
        });
    }
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let scenario: Scenario = ButterflyScenario::uniform(0.2).into();
    let mut group = c.benchmark_group("monte_carlo_1e6");
    group.sample_size(10);
    for (name, exec) in MODES {
        let config = SimConfig {
            execution: exec,
            ..SimConfig::new(1_000_000, 1)
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &config, |b, config| {
            b.iter(|| estimate_both(black_box(&scenario), config).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sweep, simulation);
criterion_main!(benches);
