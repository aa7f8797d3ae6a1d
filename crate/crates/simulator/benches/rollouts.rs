use criterion::{criterion_group, criterion_main, Criterion};
use lqg_equilibrium::solve_equilibrium;
use lqg_sim::{simulate_parallel, simulate_sequential, RolloutPlan, SimConfig};
use pbe_core::{LqgGameSpec, Mat, RunConfig};

fn game() -> LqgGameSpec {
    let m = |v: &[f64]| Mat::from_row_slice(3, 3, v);
    let r1 = m(&[0.0, 0.5, 0.0, 0.5, -1.0, 0.25, 0.0, 0.25, 0.0]);
    let r2 = m(&[0.0, 0.0, 0.5, 0.0, 0.0, 0.25, 0.5, 0.25, -1.0]);
    let q = Mat::from_element(1, 1, 1.0);
    LqgGameSpec::new(2, 1, q.clone(), vec![q.clone(), q], vec![r1, r2]).unwrap()
}

fn rollouts(c: &mut Criterion) {
    let spec = game();
    let sol = solve_equilibrium(&spec, &RunConfig::default()).unwrap();
    let plan = RolloutPlan::on_path(&spec, &sol.profile, &sol.trajectory);
    let cfg = SimConfig { master_seed: 7, num_trajectories: 20_000, keep_records: false };
    let mut g = c.benchmark_group("rollouts_20k");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| simulate_sequential(&plan, &cfg)));
    g.bench_function("parallel", |b| b.iter(|| simulate_parallel(&plan, &cfg)));
    g.finish();
}

criterion_group!(benches, rollouts);
criterion_main!(benches);
