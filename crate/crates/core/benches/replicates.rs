use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use sgini::bootstrap::{bcel_interval, boot_t_interval, BootstrapConfig};
use sgini::exec::Execution;
use sgini::rng::replicate_stream;
use sgini::simulation::{coverage_study, sample_distribution, DistributionSpec, StudyConfig};
use sgini::{Method, SGiniOrder};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn jel_coverage(c: &mut Criterion) {
    let dist = DistributionSpec::Exponential { rate: 1.0 };
    let nu = SGiniOrder::new(3.0).unwrap();
    let mut group = c.benchmark_group("jel_coverage_n80_200reps");
    for (name, execution) in MODES {
        let cfg = StudyConfig::new(200, 7).with_execution(execution);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| coverage_study(&dist, nu, 80, 0.95, Method::Jel, black_box(&cfg)).unwrap())
        });
    }
    group.finish();
}

fn bootstrap_intervals(c: &mut Criterion) {
    let dist = DistributionSpec::Exponential { rate: 1.0 };
    let nu = SGiniOrder::new(3.0).unwrap();
    let sample = sample_distribution(&dist, 80, &mut replicate_stream(1, 0)).unwrap();
    let mut group = c.benchmark_group("bootstrap_n80");
    group.sample_size(10);
    for (name, execution) in MODES {
        let cfg = BootstrapConfig::new(500, 25, 3).with_execution(execution);
        group.bench_function(BenchmarkId::new("bcel", name), |b| {
            b.iter(|| bcel_interval(black_box(&sample), nu, 0.95, &cfg).unwrap())
        });
        group.bench_function(BenchmarkId::new("boot-t", name), |b| {
            b.iter(|| boot_t_interval(black_box(&sample), nu, 0.95, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, jel_coverage, bootstrap_intervals);
criterion_main!(benches);
