use pbe_core::{DiscreteGameSpec, Error, Result};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// Beliefs closer than this in L∞ are the same particle.
pub const DEDUP_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrivateBelief {
    pub probs: Vec<f64>,
}

impl PrivateBelief {
    pub fn new(probs: Vec<f64>) -> Self {
        PrivateBelief { probs }
    }

    /// Normalizes `w`; `None` when it has no mass.
    pub fn from_weights(w: Vec<f64>) -> Option<Self> {
        let s: f64 = w.iter().sum();
        (s > 0.0).then(|| PrivateBelief { probs: w.into_iter().map(|x| x / s).collect() })
    }

    pub fn dist(&self, other: &[f64]) -> f64 {
        self.probs.iter().zip(other).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Particle {
    pub belief: PrivateBelief,
    /// `weights[v]` is the probability of this belief given V = v.
    pub weights: Vec<f64>,
}

/// One player's conditional public belief: a finite set of private beliefs
/// with a likelihood for each state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionalPublicBelief {
    pub particles: Vec<Particle>,
}

impl ConditionalPublicBelief {
    /// Adds `w` to the particle matching `b`, or appends a new one.
    fn absorb(&mut self, b: PrivateBelief, w: Vec<f64>) {
        if let Some(p) = self.particles.iter_mut().find(|p| p.belief.dist(&b.probs) <= DEDUP_TOL) {
            for (x, y) in p.weights.iter_mut().zip(&w) {
                *x += y;
            }
        } else {
            self.particles.push(Particle { belief: b, weights: w });
        }
    }

    fn canonical(mut self) -> Self {
        self.particles.retain(|p| p.weights.iter().any(|&w| w > 0.0));
        self.particles.sort_by(|a, b| {
            a.belief.probs.iter().zip(&b.belief.probs).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        });
        self
    }

    /// P(a^i = a | V = v) when player i plays `gamma`.
    pub fn action_prob(&self, gamma: &PartialStrategy, a: usize, v: usize) -> f64 {
        self.particles.iter().map(|p| p.weights[v] * gamma.probs(&p.belief.probs)[a]).sum()
    }

    pub fn find(&self, b: &[f64]) -> Option<usize> {
        self.particles.iter().position(|p| p.belief.dist(b) <= DEDUP_TOL)
    }
}

pub type Rule = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Action distribution used for beliefs that are not in the table.
#[derive(Clone)]
pub enum Fallback {
    /// The row of the nearest tabulated belief under L∞ (first on ties).
    Nearest,
    Rule(Rule),
}

/// γ^i_t: a map from private beliefs to action distributions.
#[derive(Clone)]
pub struct PartialStrategy {
    pub table: Vec<(Vec<f64>, Vec<f64>)>,
    pub fallback: Fallback,
}

impl fmt::Debug for PartialStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fb = match self.fallback {
            Fallback::Nearest => "nearest",
            Fallback::Rule(_) => "rule",
        };
        f.debug_struct("PartialStrategy").field("table", &self.table).field("fallback", &fb).finish()
    }
}

impl PartialStrategy {
    pub fn tabulated(table: Vec<(Vec<f64>, Vec<f64>)>) -> Self {
        PartialStrategy { table, fallback: Fallback::Nearest }
    }

    pub fn rule(f: Rule) -> Self {
        PartialStrategy { table: Vec::new(), fallback: Fallback::Rule(f) }
    }

    pub fn probs(&self, b: &[f64]) -> Vec<f64> {
        let dist = |row: &[f64]| row.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        if let Some((_, p)) = self.table.iter().find(|(k, _)| dist(k) <= DEDUP_TOL) {
            return p.clone();
        }
        match &self.fallback {
            Fallback::Rule(f) => f(b),
            Fallback::Nearest => {
                let mut best: Option<(f64, &Vec<f64>)> = None;
                for (k, p) in &self.table {
                    let d = dist(k);
                    if best.map_or(true, |(bd, _)| d < bd) {
                        best = Some((d, p));
                    }
                }
                best.map(|(_, p)| p.clone()).expect("tabulated strategy has an empty table")
            }
        }
    }

    /// Row for `b`, inserted if absent.
    pub fn set(&mut self, b: &[f64], p: Vec<f64>) {
        let dist = |row: &[f64]| row.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        match self.table.iter_mut().find(|(k, _)| dist(k) <= DEDUP_TOL) {
            Some(row) => row.1 = p,
            None => self.table.push((b.to_vec(), p)),
        }
    }
}

pub fn point_mass(n: usize, a: usize) -> Vec<f64> {
    let mut p = vec![0.0; n];
    p[a] = 1.0;
    p
}

/// Q_V(·) Q^i_X(x | ·, prev), normalized.
fn one_step(spec: &DiscreteGameSpec, i: usize, prev: Option<usize>, x: usize) -> Option<PrivateBelief> {
    let w = (0..spec.num_states()).map(|v| spec.prior[v] * spec.kernel(i, v, prev, x)).collect();
    PrivateBelief::from_weights(w)
}

/// ξ^i_1 after observing `x`.
pub fn init_private(spec: &DiscreteGameSpec, i: usize, x: usize) -> Result<PrivateBelief> {
    one_step(spec, i, None, x).ok_or_else(|| Error::OffSupport(format!("player {i} cannot observe {x} at stage 1")))
}

/// π^i_1: one particle per distinct first-stage posterior.
pub fn init_public(spec: &DiscreteGameSpec, i: usize) -> ConditionalPublicBelief {
    reset_public(spec, i, None)
}

fn reset_public(spec: &DiscreteGameSpec, i: usize, prev: Option<usize>) -> ConditionalPublicBelief {
    let mut out = ConditionalPublicBelief { particles: Vec::new() };
    for x in 0..spec.num_obs(i) {
        if let Some(b) = one_step(spec, i, prev, x) {
            out.absorb(b, (0..spec.num_states()).map(|v| spec.kernel(i, v, prev, x)).collect());
        }
    }
    out.canonical()
}

/// Probability of the others' part of `joint` given V = v, for each v.
fn others_likelihood(spec: &DiscreteGameSpec, i: usize, pi: &[ConditionalPublicBelief], gamma: &[PartialStrategy], joint: usize) -> Vec<f64> {
    let a = spec.joint_actions(joint);
    (0..spec.num_states())
        .map(|v| (0..spec.num_players).filter(|&j| j != i).map(|j| pi[j].action_prob(&gamma[j], a[j], v)).product())
        .collect()
}

/// Bayes update of player i's private belief after joint action `joint` and
/// own next observation `x`. `pi` and `gamma` hold every player's entry; only
/// the others' are used.
pub fn update_private_belief(
    spec: &DiscreteGameSpec,
    i: usize,
    xi: &PrivateBelief,
    pi: &[ConditionalPublicBelief],
    gamma: &[PartialStrategy],
    joint: usize,
    x: usize,
) -> Result<PrivateBelief> {
    let lik = others_likelihood(spec, i, pi, gamma, joint);
    let w = (0..spec.num_states()).map(|v| xi.probs[v] * lik[v] * spec.kernel(i, v, Some(joint), x)).collect();
    PrivateBelief::from_weights(w).ok_or_else(|| {
        Error::OffSupport(format!("player {i}: actions {} and observation {x} have probability zero", spec.joint_key(joint)))
    })
}

/// Private update with the off-support rule: restart from the prior and the
/// new observation alone (the prior itself if even that is impossible).
pub fn update_private_or_reset(
    spec: &DiscreteGameSpec,
    i: usize,
    xi: &PrivateBelief,
    pi: &[ConditionalPublicBelief],
    gamma: &[PartialStrategy],
    joint: usize,
    x: usize,
) -> PrivateBelief {
    update_private_belief(spec, i, xi, pi, gamma, joint, x)
        .unwrap_or_else(|_| one_step(spec, i, Some(joint), x).unwrap_or_else(|| PrivateBelief::new(spec.prior.clone())))
}

/// Update of π^i after joint action `joint`. States under which player i's
/// action is impossible keep uniform weights over the new particles; no
/// on-path belief puts mass on them.
pub fn update_public_belief(
    spec: &DiscreteGameSpec,
    i: usize,
    pi: &[ConditionalPublicBelief],
    gamma: &[PartialStrategy],
    joint: usize,
) -> Result<ConditionalPublicBelief> {
    let nv = spec.num_states();
    let ai = spec.joint_actions(joint)[i];
    let den: Vec<f64> = (0..nv).map(|v| pi[i].action_prob(&gamma[i], ai, v)).collect();
    if den.iter().all(|&d| d <= 0.0) {
        return Err(Error::OffSupport(format!("player {i} never plays action {ai} under the current strategy")));
    }
    let mut out = ConditionalPublicBelief { particles: Vec::new() };
    for p in &pi[i].particles {
        let g = gamma[i].probs(&p.belief.probs)[ai];
        if g <= 0.0 {
            continue;
        }
        for x in 0..spec.num_obs(i) {
            let w: Vec<f64> = (0..nv).map(|v| p.weights[v] * g * spec.kernel(i, v, Some(joint), x)).collect();
            if w.iter().all(|&y| y <= 0.0) {
                continue;
            }
            let child = update_private_or_reset(spec, i, &p.belief, pi, gamma, joint, x);
            out.absorb(child, w);
        }
    }
    let mut out = out.canonical();
    let k = out.particles.len() as f64;
    for v in 0..nv {
        for p in &mut out.particles {
            p.weights[v] = if den[v] > 0.0 { p.weights[v] / den[v] } else { 1.0 / k };
        }
    }
    Ok(out)
}

pub fn update_public_or_reset(
    spec: &DiscreteGameSpec,
    i: usize,
    pi: &[ConditionalPublicBelief],
    gamma: &[PartialStrategy],
    joint: usize,
) -> ConditionalPublicBelief {
    update_public_belief(spec, i, pi, gamma, joint).unwrap_or_else(|_| reset_public(spec, i, Some(joint)))
}

/// F_π: every player's conditional public belief after `joint`.
pub fn update_public_all(spec: &DiscreteGameSpec, pi: &[ConditionalPublicBelief], gamma: &[PartialStrategy], joint: usize) -> Vec<ConditionalPublicBelief> {
    (0..spec.num_players).map(|i| update_public_or_reset(spec, i, pi, gamma, joint)).collect()
}

/// Player i's belief over the others' private beliefs, as (particle index
/// per other player, probability). Index lists skip player i.
pub fn belief_over_others(spec: &DiscreteGameSpec, i: usize, xi: &PrivateBelief, pi: &[ConditionalPublicBelief]) -> Vec<(Vec<usize>, f64)> {
    let others: Vec<usize> = (0..spec.num_players).filter(|&j| j != i).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; others.len()];
    loop {
        let p: f64 = (0..spec.num_states())
            .map(|v| xi.probs[v] * others.iter().zip(&idx).map(|(&j, &k)| pi[j].particles[k].weights[v]).product::<f64>())
            .sum();
        out.push((idx.clone(), p));
        let mut r = others.len();
        loop {
            if r == 0 {
                return out;
            }
            r -= 1;
            idx[r] += 1;
            if idx[r] < pi[others[r]].particles.len() {
                break;
            }
            idx[r] = 0;
        }
    }
}

/// One outcome of player i's stage: others' actions, own next observation.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub joint: usize,
    pub x: usize,
    pub prob: f64,
}

/// P(a^{-i}_t, x^i_{t+1} | π_t, ξ^i_t, a^i_t), positive entries only.
pub fn outcomes(
    spec: &DiscreteGameSpec,
    i: usize,
    xi: &PrivateBelief,
    pi: &[ConditionalPublicBelief],
    gamma: &[PartialStrategy],
    ai: usize,
) -> Vec<Outcome> {
    let mut out = Vec::new();
    for joint in (0..spec.num_joint()).filter(|&k| spec.joint_actions(k)[i] == ai) {
        let lik = others_likelihood(spec, i, pi, gamma, joint);
        for x in 0..spec.num_obs(i) {
            let prob: f64 = (0..spec.num_states()).map(|v| xi.probs[v] * lik[v] * spec.kernel(i, v, Some(joint), x)).sum();
            if prob > 0.0 {
                out.push(Outcome { joint, x, prob });
            }
        }
    }
    out
}

/// r̂^i_t(π_t, ξ^i_t, a^i): expected stage reward of own action `ai`.
pub fn expected_reward(
    spec: &DiscreteGameSpec,
    i: usize,
    t: usize,
    xi: &PrivateBelief,
    pi: &[ConditionalPublicBelief],
    gamma: &[PartialStrategy],
    ai: usize,
) -> f64 {
    (0..spec.num_joint())
        .filter(|&k| spec.joint_actions(k)[i] == ai)
        .map(|k| {
            let lik = others_likelihood(spec, i, pi, gamma, k);
            (0..spec.num_states()).map(|v| xi.probs[v] * lik[v] * spec.reward(i, t, v, k)).sum::<f64>()
        })
        .sum()
}

/// The controlled Markov kernel of (π, ξ^i) under own action `ai`: next
/// public belief, next private belief and probability, with equal pairs merged.
pub fn markov_kernel(
    spec: &DiscreteGameSpec,
    i: usize,
    xi: &PrivateBelief,
    pi: &[ConditionalPublicBelief],
    gamma: &[PartialStrategy],
    ai: usize,
) -> Vec<(Vec<ConditionalPublicBelief>, PrivateBelief, f64)> {
    let mut out: Vec<(Vec<ConditionalPublicBelief>, PrivateBelief, f64)> = Vec::new();
    let mut next_pi: Option<(usize, Vec<ConditionalPublicBelief>)> = None;
    for o in outcomes(spec, i, xi, pi, gamma, ai) {
        if next_pi.as_ref().map_or(true, |(k, _)| *k != o.joint) {
            next_pi = Some((o.joint, update_public_all(spec, pi, gamma, o.joint)));
        }
        let np = &next_pi.as_ref().unwrap().1;
        let nx = update_private_or_reset(spec, i, xi, pi, gamma, o.joint, o.x);
        let key = public_key(np);
        match out.iter_mut().find(|(p, b, _)| public_key(p) == key && b.dist(&nx.probs) <= DEDUP_TOL) {
            Some(e) => e.2 += o.prob,
            None => out.push((np.clone(), nx, o.prob)),
        }
    }
    out
}

/// Quantized encoding used as a map key. Values 1e-9 apart may still land
/// in different cells; keys are only used for memoization.
pub fn quantize(xs: &[f64]) -> Vec<i64> {
    xs.iter().map(|x| (x * 1e9).round() as i64).collect()
}

pub fn public_key(pi: &[ConditionalPublicBelief]) -> Vec<i64> {
    let mut k = Vec::new();
    for c in pi {
        k.push(c.particles.len() as i64);
        for p in &c.particles {
            k.extend(quantize(&p.belief.probs));
            k.extend(quantize(&p.weights));
        }
    }
    k
}
