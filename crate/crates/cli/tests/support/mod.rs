//! Test-side oracles shared by the acceptance run.
#![allow(dead_code)]

use lqg_equilibrium::{next_state_map, Solution, StageLayouts};
use pbe_core::blocks::others;
use pbe_core::linalg::block_diag;
use pbe_core::{Blk, DiscreteGameSpec, LqgGameSpec, Mat, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mean and covariance of `[v; v̂^{-i}]` given player i's information.
fn hidden(sol: &Solution, nv: usize, t: usize, i: usize, vhat: &Vector, f: &Vector) -> (Vector, Mat) {
    let st = &sol.trajectory.stages[t];
    let n = st.e.nrows() / nv;
    let mut mean = Vector::zeros(n * nv);
    mean.rows_mut(0, nv).copy_from(vhat);
    for (r, &j) in others(n, i).iter().enumerate() {
        mean.rows_mut(nv + r * nv, nv).copy_from(&(st.e_block(j, nv) * vhat + f.rows(j * nv, nv)));
    }
    (mean, st.sigma_pred[i].clone())
}

/// E[y' A y + b' y] for y ~ N(mu, s)
fn gauss(a: &Mat, b: &Vector, mu: &Vector, s: &Mat) -> f64 {
    (mu.transpose() * a * mu)[(0, 0)] + (a * s).trace() + b.dot(mu)
}

/// Right side of the Bellman equation at the equilibrium action, from the
/// filter covariances and the next-stage value.
pub fn bellman_rhs(spec: &LqgGameSpec, sol: &Solution, t: usize, i: usize, vhat: &Vector, f: &Vector) -> f64 {
    let (n, nv, na) = (spec.num_players, spec.state_dim, spec.action_dim);
    let strat = &sol.profile[t];
    let (mu, s) = hidden(sol, nv, t, i, vhat, f);
    let ai = strat[i].action(vhat, f);

    let dr = spec.reward_dim();
    let mut p = Mat::zeros(dr, n * nv);
    let mut p0 = Vector::zeros(dr);
    p.view_mut((0, 0), (nv, nv)).copy_from(&Mat::identity(nv, nv));
    p0.rows_mut(nv + i * na, na).copy_from(&ai);
    for (r, &j) in others(n, i).iter().enumerate() {
        p.view_mut((nv + j * na, nv + r * nv), (na, nv)).copy_from(&strat[j].l);
        p0.rows_mut(nv + j * na, na).copy_from(&strat[j].offset(f));
    }
    let r = spec.reward(i, t);
    let reward = gauss(&(p.transpose() * r * &p), &(p.transpose() * r * &p0 * 2.0), &mu, &s)
        + (p0.transpose() * r * &p0)[(0, 0)];
    if t + 1 == spec.horizon {
        return reward;
    }

    let ly = StageLayouts::new(n, nv, na, i);
    let pl = &ly.prop;
    let dy = n * nv + nv;
    let mut u = Mat::zeros(pl.dim(), dy);
    let mut u0 = Vector::zeros(pl.dim());
    u0.rows_mut(pl.range(Blk::Vh(i)).start, nv).copy_from(vhat);
    u0.rows_mut(pl.range(Blk::A(i)).start, na).copy_from(&ai);
    let fr = StageLayouts::f_range(pl, n);
    u0.rows_mut(fr.start, n * nv).copy_from(f);
    for (r, &j) in others(n, i).iter().enumerate() {
        u.view_mut((pl.range(Blk::Vh(j)).start, nv + r * nv), (nv, nv)).copy_from(&Mat::identity(nv, nv));
    }
    let xr = pl.range(Blk::X(i)).start;
    u.view_mut((xr, 0), (nv, nv)).copy_from(&Mat::identity(nv, nv));
    u.view_mut((xr, n * nv), (nv, nv)).copy_from(&Mat::identity(nv, nv));
    let (g, g0) = next_state_map(spec, &sol.trajectory.gains[t], i, strat);
    let a = &g * &u;
    let a0 = &g * &u0 + g0;
    let z = &sol.values[t + 1][i];
    let mut mu2 = Vector::zeros(dy);
    mu2.rows_mut(0, n * nv).copy_from(&mu);
    let s2 = block_diag(&[s, spec.obs_noise_cov[i].clone()]);
    let cont = gauss(&(a.transpose() * &z.m * &a), &(a.transpose() * (&z.m * &a0 * 2.0 + &z.b)), &mu2, &s2)
        + (a0.transpose() * &z.m * &a0)[(0, 0)]
        + z.b.dot(&a0)
        + z.c;
    reward + cont
}

fn names(p: &str, n: usize) -> Vec<String> {
    (0..n).map(|k| format!("{p}{k}")).collect()
}

fn simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Random game with action-dependent observation kernels.
pub fn random_game(seed: u64, n: usize, nv: usize, nx: usize, na: usize, horizon: usize) -> DiscreteGameSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nj = na.pow(n as u32);
    let obs_kernel = (0..n)
        .map(|_| (0..nv).map(|_| (0..=nj).map(|_| simplex(&mut rng, nx)).collect()).collect())
        .collect();
    let rewards = (0..n)
        .map(|_| (0..horizon).map(|_| (0..nv).map(|_| (0..nj).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()).collect())
        .collect();
    DiscreteGameSpec {
        num_players: n,
        horizon,
        state_values: names("v", nv),
        prior: simplex(&mut rng, nv),
        obs_values: vec![names("x", nx); n],
        action_values: vec![names("a", na); n],
        obs_kernel,
        rewards,
        constant_rewards: false,
    }
}

/// Softmax of a belief-linear score with coefficients keyed by
/// (seed, player, stage, public history).
pub fn soft_policy(seed: u64, na: usize) -> impl Fn(usize, usize, &[usize], &[f64]) -> Vec<f64> {
    move |i, t, public, xi| {
        let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
        for p in [i as u64, t as u64].into_iter().chain(public.iter().map(|&a| a as u64 + 7)) {
            h = (h ^ p).wrapping_mul(0x1000_0000_01b3).rotate_left(17);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(h);
        let score: Vec<f64> = (0..na)
            .map(|_| xi.iter().map(|x| x * rng.random_range(-3.0..3.0)).sum::<f64>() + rng.random_range(-0.5..0.5))
            .collect();
        let m = score.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = score.iter().map(|s| (s - m).exp()).collect();
        let z: f64 = e.iter().sum();
        e.into_iter().map(|x| x / z).collect()
    }
}
