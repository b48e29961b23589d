//! Batch rollouts on one thread versus the rayon pool.
//!
//! Build with `--no-default-features` to see the pool path fall back to a
//! plain loop.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use holonav::engine::EnvConfig;
use holonav::evaluation::{run_scenario_suite, ScenarioSuite};
use holonav::observation::AgentVariant;
use holonav::parallel::parallel_enabled;
use holonav::policy::GoToSubgoal;

fn bench_suite_batch(c: &mut Criterion) {
    let env = EnvConfig { max_ticks: 200, ..Default::default() };
    let policy = GoToSubgoal::new(env.limits);
    let suite = ScenarioSuite::builtin("obst20").unwrap().with_episodes(32);
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());

    let mut group = c.benchmark_group(format!("suite_batch_32/parallel_feature={}", parallel_enabled()));
    group.sample_size(10);
    for (label, jobs) in [("sequential", 1), ("pool", cores.max(2))] {
        group.bench_with_input(BenchmarkId::new(label, jobs), &jobs, |b, &jobs| {
            b.iter(|| black_box(run_scenario_suite(&suite, &policy, AgentVariant::Agent4, &env, jobs).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_suite_batch);
criterion_main!(benches);
