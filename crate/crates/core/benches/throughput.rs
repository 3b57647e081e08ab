use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mvcomp::experiments::{phase_trials, PhaseConfig, PhaseMode};
use mvcomp::pattern::gen_fixed_per_column;
use mvcomp::{finiteness_oracle, CheckConfig, Exec, OracleConfig, ProblemShape, RankTriple};

fn phase(c: &mut Criterion) {
    let mut group = c.benchmark_group("phase_trials");
    group.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        let cfg = PhaseConfig {
            shape: ProblemShape::new(12, 12, 12).unwrap(),
            ranks: RankTriple::new(2, 2, 2).unwrap(),
            l_values: vec![3, 4, 5, 6],
            trials: 16,
            seed: 1,
            mode: PhaseMode::Finite,
            run_checker: true,
            oracle: OracleConfig::default(),
            check: CheckConfig::default(),
            exec,
        };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &cfg, |b, cfg| {
            b.iter(|| phase_trials(cfg).unwrap())
        });
    }
    group.finish();
}

fn oracle_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_trials");
    group.sample_size(10);
    let ranks = RankTriple::new(4, 3, 3).unwrap();
    let pattern = gen_fixed_per_column(ProblemShape::new(20, 20, 20).unwrap(), 8, 3).unwrap();
    for exec in [Exec::Sequential, Exec::Parallel] {
        let cfg = OracleConfig {
            trials: 8,
            exec,
            ..OracleConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &cfg, |b, cfg| {
            b.iter(|| finiteness_oracle(&pattern, ranks, cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, phase, oracle_trials);
criterion_main!(benches);
