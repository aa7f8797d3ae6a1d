//! Brute-force joint distribution over full histories. Nothing here uses the
//! belief recursions: every posterior is obtained by summing the joint.

use crate::Caps;
use pbe_core::{DiscreteGameSpec, Error, Result};
use std::collections::BTreeMap;

/// Action rule of a structured profile: player `i` at stage `t` after public
/// actions `public` (joint indices) with private belief `xi`.
pub trait StructuredPolicy {
    fn probs(&self, i: usize, t: usize, public: &[usize], xi: &[f64]) -> Vec<f64>;
}

impl<F: Fn(usize, usize, &[usize], &[f64]) -> Vec<f64>> StructuredPolicy for F {
    fn probs(&self, i: usize, t: usize, public: &[usize], xi: &[f64]) -> Vec<f64> {
        self(i, t, public, xi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistoryNode {
    /// Zero-based stage.
    pub t: usize,
    pub v: usize,
    /// `x[s][i]` for s = 0..=t.
    pub x: Vec<Vec<usize>>,
    /// Joint action indices for s = 0..t.
    pub a: Vec<usize>,
    pub prob: f64,
    /// Index of the parent node at stage t - 1.
    pub parent: Option<usize>,
}

impl HistoryNode {
    /// Player i's information: own observations then public actions.
    pub fn info_key(&self, i: usize) -> (Vec<usize>, Vec<usize>) {
        (self.x.iter().map(|xs| xs[i]).collect(), self.a.clone())
    }
}

pub struct Enumeration {
    /// Positive-probability histories per stage.
    pub stages: Vec<Vec<HistoryNode>>,
    /// `beliefs[t][node][i]`: P(V | player i's information), by summation.
    pub beliefs: Vec<Vec<Vec<Vec<f64>>>>,
}

fn joint_obs(spec: &DiscreteGameSpec, k: usize) -> Vec<usize> {
    let mut out = vec![0; spec.num_players];
    let mut k = k;
    for i in (0..spec.num_players).rev() {
        out[i] = k % spec.num_obs(i);
        k /= spec.num_obs(i);
    }
    out
}

fn obs_prob(spec: &DiscreteGameSpec, v: usize, prev: Option<usize>, x: &[usize]) -> f64 {
    x.iter().enumerate().map(|(i, &xi)| spec.kernel(i, v, prev, xi)).product()
}

fn posteriors(spec: &DiscreteGameSpec, nodes: &[HistoryNode]) -> Vec<Vec<Vec<f64>>> {
    let nv = spec.num_states();
    let mut out = vec![vec![Vec::new(); spec.num_players]; nodes.len()];
    for i in 0..spec.num_players {
        let mut mass: BTreeMap<(Vec<usize>, Vec<usize>), Vec<f64>> = BTreeMap::new();
        for n in nodes {
            mass.entry(n.info_key(i)).or_insert_with(|| vec![0.0; nv])[n.v] += n.prob;
        }
        for (k, n) in nodes.iter().enumerate() {
            let m = &mass[&n.info_key(i)];
            let s: f64 = m.iter().sum();
            out[k][i] = m.iter().map(|x| x / s).collect();
        }
    }
    out
}

/// Enumerates stages 0..stages under `policy`. Zero-probability branches are
/// dropped.
pub fn enumerate_histories(spec: &DiscreteGameSpec, policy: &dyn StructuredPolicy, stages: usize, caps: &Caps) -> Result<Enumeration> {
    caps.check(spec)?;
    if stages == 0 || stages > spec.horizon {
        return Err(Error::validation(format!("cannot enumerate {stages} stages of a {}-stage game", spec.horizon)));
    }
    let nx: usize = (0..spec.num_players).map(|i| spec.num_obs(i)).product();
    let mut first = Vec::new();
    for v in 0..spec.num_states() {
        for k in 0..nx {
            let x = joint_obs(spec, k);
            let prob = spec.prior[v] * obs_prob(spec, v, None, &x);
            if prob > 0.0 {
                first.push(HistoryNode { t: 0, v, x: vec![x], a: vec![], prob, parent: None });
            }
        }
    }
    let mut en = Enumeration { beliefs: vec![posteriors(spec, &first)], stages: vec![first] };
    for t in 1..stages {
        let prev = &en.stages[t - 1];
        let mut next = Vec::new();
        for (pk, node) in prev.iter().enumerate() {
            let acts: Vec<Vec<f64>> =
                (0..spec.num_players).map(|i| policy.probs(i, t - 1, &node.a, &en.beliefs[t - 1][pk][i])).collect();
            for joint in 0..spec.num_joint() {
                let pa: f64 = spec.joint_actions(joint).iter().enumerate().map(|(i, &a)| acts[i][a]).product();
                if pa <= 0.0 {
                    continue;
                }
                for k in 0..nx {
                    let x = joint_obs(spec, k);
                    let prob = node.prob * pa * obs_prob(spec, node.v, Some(joint), &x);
                    if prob > 0.0 {
                        let mut xs = node.x.clone();
                        xs.push(x);
                        let mut a = node.a.clone();
                        a.push(joint);
                        next.push(HistoryNode { t, v: node.v, x: xs, a, prob, parent: Some(pk) });
                    }
                }
            }
            if next.len() > caps.max_histories {
                return Err(Error::Cap(format!("more than {} histories at stage {}", caps.max_histories, t + 1)));
            }
        }
        en.beliefs.push(posteriors(spec, &next));
        en.stages.push(next);
    }
    Ok(en)
}
