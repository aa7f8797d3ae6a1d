use crate::stats::{empirical_value, Summary};
use lqg_filter::{init_private, private_step, update_f, Trajectory};
use pbe_core::linalg::{psd_factor, quad};
use pbe_core::{Error, LqgGameSpec, Mat, Profile, Result, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub master_seed: u64,
    pub num_trajectories: usize,
    /// Keep full per-stage records (needed for dumps and consistency checks).
    pub keep_records: bool,
}

/// One realized play. Vectors are indexed `[t][player]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub id: usize,
    pub v: Vector,
    pub x: Vec<Vec<Vector>>,
    pub vhat: Vec<Vec<Vector>>,
    pub a: Vec<Vec<Vector>>,
    pub f: Vec<Vector>,
    pub rewards: Vec<Vec<f64>>,
}

impl TrajectoryRecord {
    pub fn player_totals(&self) -> Vec<f64> {
        let n = self.rewards.first().map_or(0, |r| r.len());
        (0..n).map(|i| self.rewards.iter().map(|r| r[i]).sum()).collect()
    }
}

/// What is being simulated: the profile everyone believes (used by the
/// filters and the offsets m^j) and the profile actually played. They differ
/// only when testing unilateral deviations.
#[derive(Clone, Copy)]
pub struct RolloutPlan<'a> {
    pub spec: &'a LqgGameSpec,
    pub believed: &'a Profile,
    pub actual: &'a Profile,
    pub forward: &'a Trajectory,
}

impl<'a> RolloutPlan<'a> {
    pub fn on_path(spec: &'a LqgGameSpec, profile: &'a Profile, forward: &'a Trajectory) -> Self {
        RolloutPlan { spec, believed: profile, actual: profile, forward }
    }
}

#[derive(Clone, Debug)]
pub struct SimOutput {
    pub summary: Summary,
    /// Per-player total reward of each successful trajectory, in trajectory order.
    pub totals: Vec<Vec<f64>>,
    /// In trajectory order; empty unless `keep_records`.
    pub records: Vec<TrajectoryRecord>,
}

struct Factors {
    prior: Mat,
    noise: Vec<Mat>,
}

fn factors(spec: &LqgGameSpec) -> Factors {
    Factors { prior: psd_factor(&spec.prior_cov), noise: spec.obs_noise_cov.iter().map(psd_factor).collect() }
}

fn gaussian(rng: &mut ChaCha20Rng, factor: &Mat) -> Vector {
    let z = Vector::from_fn(factor.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
    factor * z
}

fn rollout(plan: &RolloutPlan, fac: &Factors, master_seed: u64, id: usize) -> Result<TrajectoryRecord> {
    let spec = plan.spec;
    let (n, tt) = (spec.num_players, spec.horizon);
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(id as u64);
    let v = gaussian(&mut rng, &fac.prior);
    let mut rec = TrajectoryRecord { id, v: v.clone(), x: vec![], vhat: vec![], a: vec![], f: vec![], rewards: vec![] };
    let mut f = Vector::zeros(n * spec.state_dim);
    let mut states = Vec::with_capacity(n);
    for t in 0..tt {
        let x: Vec<Vector> = (0..n).map(|i| &v + gaussian(&mut rng, &fac.noise[i])).collect();
        if t == 0 {
            states = (0..n).map(|i| init_private(&plan.forward.basis_gain[i], &x[i])).collect();
        } else {
            let g = &plan.forward.gains[t - 1];
            let bel = &plan.believed[t - 1];
            let l: Vec<Mat> = bel.iter().map(|s| s.l.clone()).collect();
            let fp = &rec.f[t - 1];
            let m: Vec<Vector> = bel.iter().map(|s| s.offset(fp)).collect();
            let ap = &rec.a[t - 1];
            states = (0..n).map(|i| private_step(spec, g, i, &states[i], &l, fp, ap, &m, &x[i])).collect();
            f = update_f(spec, g, &l, fp, ap, &m);
        }
        let a: Vec<Vector> = (0..n).map(|i| plan.actual[t][i].action(&states[i].vhat, &f)).collect();
        let mut joint = Vector::zeros(spec.reward_dim());
        joint.rows_mut(0, spec.state_dim).copy_from(&v);
        for (i, ai) in a.iter().enumerate() {
            joint.rows_mut(spec.state_dim + i * spec.action_dim, spec.action_dim).copy_from(ai);
        }
        let r: Vec<f64> = (0..n).map(|i| quad(spec.reward(i, t), &joint)).collect();
        let finite = r.iter().all(|x| x.is_finite()) && f.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::Numerical(format!("trajectory {id} left the finite range at stage {}", t + 1)));
        }
        rec.vhat.push(states.iter().map(|s| s.vhat.clone()).collect());
        rec.x.push(x);
        rec.a.push(a);
        rec.f.push(f.clone());
        rec.rewards.push(r);
    }
    Ok(rec)
}

/// Trajectory `id` of the run seeded by `master_seed`.
pub fn simulate_one(plan: &RolloutPlan, master_seed: u64, id: usize) -> Result<TrajectoryRecord> {
    rollout(plan, &factors(plan.spec), master_seed, id)
}

type Outcome = Result<(Vec<f64>, Option<TrajectoryRecord>)>;

fn run_one(plan: &RolloutPlan, fac: &Factors, cfg: &SimConfig, k: usize) -> Outcome {
    let rec = rollout(plan, fac, cfg.master_seed, k)?;
    Ok((rec.player_totals(), cfg.keep_records.then_some(rec)))
}

fn finish(plan: &RolloutPlan, cfg: &SimConfig, results: Vec<Outcome>) -> SimOutput {
    let mut failures = 0;
    let mut totals = Vec::with_capacity(results.len());
    let mut records = Vec::new();
    for r in results {
        match r {
            Ok((tot, rec)) => {
                totals.push(tot);
                records.extend(rec);
            }
            Err(_) => failures += 1,
        }
    }
    let summary = empirical_value(&totals, plan.spec.horizon, failures, cfg.master_seed);
    SimOutput { summary, totals, records }
}

pub fn simulate_sequential(plan: &RolloutPlan, cfg: &SimConfig) -> SimOutput {
    let fac = factors(plan.spec);
    let results = (0..cfg.num_trajectories).map(|k| run_one(plan, &fac, cfg, k)).collect();
    finish(plan, cfg, results)
}

/// Same output as `simulate_sequential`, bit for bit, on any number of threads.
#[cfg(feature = "parallel")]
pub fn simulate_parallel(plan: &RolloutPlan, cfg: &SimConfig) -> SimOutput {
    use rayon::prelude::*;
    let fac = factors(plan.spec);
    let results = (0..cfg.num_trajectories).into_par_iter().map(|k| run_one(plan, &fac, cfg, k)).collect();
    finish(plan, cfg, results)
}

pub fn simulate(plan: &RolloutPlan, cfg: &SimConfig) -> SimOutput {
    #[cfg(feature = "parallel")]
    {
        simulate_parallel(plan, cfg)
    }
    #[cfg(not(feature = "parallel"))]
    {
        simulate_sequential(plan, cfg)
    }
}

/// f_1..f_T recomputed offline from the recorded actions.
pub fn replay_f(spec: &LqgGameSpec, profile: &Profile, forward: &Trajectory, rec: &TrajectoryRecord) -> Vec<Vector> {
    let mut out = vec![Vector::zeros(spec.num_players * spec.state_dim)];
    for t in 1..spec.horizon {
        let l: Vec<Mat> = profile[t - 1].iter().map(|s| s.l.clone()).collect();
        let m: Vec<Vector> = profile[t - 1].iter().map(|s| s.offset(&out[t - 1])).collect();
        let next = update_f(spec, &forward.gains[t - 1], &l, &out[t - 1], &rec.a[t - 1], &m);
        out.push(next);
    }
    out
}
