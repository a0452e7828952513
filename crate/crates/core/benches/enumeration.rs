use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vanlam_core::bits::BitString;
use vanlam_core::kolmo::ComplexityTable;
use vanlam_core::machine::{ExecBudget, MachineConfig, ProgramSpace};
use vanlam_core::martingale::machine_pool;
use vanlam_core::par::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn complexity_table(c: &mut Criterion) {
    let cfg = MachineConfig::default();
    let space = ProgramSpace::build(&cfg, 18).unwrap();
    let budget = ExecBudget::quadratic(4);
    let mut group = c.benchmark_group("complexity-table");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, 18), |b| {
            b.iter(|| ComplexityTable::build(&space, &BitString::new(), Some(&budget), exec))
        });
    }
    group.finish();
}

fn greedy_extension(c: &mut Criterion) {
    let cfg = MachineConfig::default();
    let pool = machine_pool(
        &cfg,
        10,
        Some(ExecBudget::quadratic(4)),
        ExecBudget::quadratic(1),
    )
    .unwrap();
    let prefix = BitString::zeros(16);
    let mut group = c.benchmark_group("greedy-extension");
    group.sample_size(10);
    for (name, exec) in MODES {
        let mix = pool.mixture(exec);
        group.bench_function(BenchmarkId::new(name, pool.len()), |b| {
            b.iter(|| mix.extend_greedy(&prefix, 12))
        });
    }
    group.finish();
}

criterion_group!(benches, complexity_table, greedy_extension);
criterion_main!(benches);
