#![allow(dead_code)]

use pbe_core::{load_spec, DiscreteGameSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn names(p: &str, n: usize) -> Vec<String> {
    (0..n).map(|k| format!("{p}{k}")).collect()
}

pub fn simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Random game; kernels depend on the previous joint action when `coupled`.
pub fn random_game(seed: u64, n: usize, nv: usize, nx: usize, na: usize, horizon: usize, coupled: bool) -> DiscreteGameSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nj = na.pow(n as u32);
    let obs_kernel = (0..n)
        .map(|_| {
            (0..nv)
                .map(|_| {
                    let base = simplex(&mut rng, nx);
                    (0..=nj).map(|_| if coupled { simplex(&mut rng, nx) } else { base.clone() }).collect()
                })
                .collect()
        })
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

fn mix(seed: u64, parts: &[u64]) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        h = (h ^ p).wrapping_mul(0x1000_0000_01b3).rotate_left(17);
    }
    h
}

/// Randomized structured policy: softmax of a belief-linear score whose
/// coefficients depend on (player, stage, public history).
pub fn soft_policy(seed: u64, na: usize) -> impl Fn(usize, usize, &[usize], &[f64]) -> Vec<f64> {
    move |i, t, public, xi| {
        let mut parts = vec![i as u64, t as u64];
        parts.extend(public.iter().map(|&a| a as u64 + 7));
        let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, &parts));
        let score: Vec<f64> = (0..na)
            .map(|_| xi.iter().map(|x| x * rng.random_range(-3.0..3.0)).sum::<f64>() + rng.random_range(-0.5..0.5))
            .collect();
        let m = score.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = score.iter().map(|s| (s - m).exp()).collect();
        let z: f64 = e.iter().sum();
        e.into_iter().map(|x| x / z).collect()
    }
}

/// Deterministic structured policy: action of the largest belief-linear score.
pub fn hard_policy(seed: u64, na: usize) -> impl Fn(usize, usize, &[usize], &[f64]) -> Vec<f64> {
    let soft = soft_policy(seed, na);
    move |i, t, public, xi| {
        let p = soft(i, t, public, xi);
        let k = (0..na).fold(0, |b, a| if p[a] > p[b] { a } else { b });
        (0..na).map(|a| if a == k { 1.0 } else { 0.0 }).collect()
    }
}

pub fn toy_game() -> DiscreteGameSpec {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/discrete_toy.json");
    load_spec(path, None).unwrap().discrete().unwrap().clone()
}
