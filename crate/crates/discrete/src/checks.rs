//! Belief recursions checked against the enumeration oracle.

use crate::belief::{
    belief_over_others, init_private, init_public, markov_kernel, public_key, quantize, update_private_belief,
    update_public_all, ConditionalPublicBelief, PartialStrategy, PrivateBelief,
};
use crate::enumerate::{enumerate_histories, Enumeration, HistoryNode, StructuredPolicy};
use crate::Caps;
use pbe_core::{DiscreteGameSpec, Result};
use serde::Serialize;
use std::collections::BTreeMap;

/// Tolerance for matching support points of two finite distributions.
const MATCH_TOL: f64 = 1e-9;

/// Largest absolute probability difference between two finite distributions
/// whose support points are vectors, matched within `MATCH_TOL`.
pub fn distribution_gap(a: &[(Vec<f64>, f64)], b: &[(Vec<f64>, f64)]) -> f64 {
    let merge = |xs: &[(Vec<f64>, f64)]| {
        let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
        for (k, p) in xs {
            match out.iter_mut().find(|(q, _)| linf(q, k) <= MATCH_TOL) {
                Some(e) => e.1 += p,
                None => out.push((k.clone(), *p)),
            }
        }
        out
    };
    let (a, b) = (merge(a), merge(b));
    let mut gap = 0.0_f64;
    for (k, p) in &a {
        let q = b.iter().find(|(r, _)| linf(r, k) <= MATCH_TOL).map_or(0.0, |e| e.1);
        gap = gap.max((p - q).abs());
    }
    for (k, q) in &b {
        if !a.iter().any(|(r, _)| linf(r, k) <= MATCH_TOL) {
            gap = gap.max(q.abs());
        }
    }
    gap
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// π_t and γ_t along each public history, computed by the recursions.
pub struct PublicPath<'a> {
    spec: &'a DiscreteGameSpec,
    policy: &'a dyn StructuredPolicy,
    cache: BTreeMap<Vec<usize>, (Vec<ConditionalPublicBelief>, Vec<PartialStrategy>)>,
}

impl<'a> PublicPath<'a> {
    pub fn new(spec: &'a DiscreteGameSpec, policy: &'a dyn StructuredPolicy) -> Self {
        PublicPath { spec, policy, cache: BTreeMap::new() }
    }

    fn gammas(&self, public: &[usize], pi: &[ConditionalPublicBelief]) -> Vec<PartialStrategy> {
        let t = public.len();
        pi.iter()
            .enumerate()
            .map(|(i, c)| {
                let rows = c
                    .particles
                    .iter()
                    .map(|p| (p.belief.probs.clone(), self.policy.probs(i, t, public, &p.belief.probs)))
                    .collect();
                PartialStrategy::tabulated(rows)
            })
            .collect()
    }

    pub fn get(&mut self, public: &[usize]) -> (Vec<ConditionalPublicBelief>, Vec<PartialStrategy>) {
        if let Some(e) = self.cache.get(public) {
            return e.clone();
        }
        let pi = match public.split_last() {
            None => (0..self.spec.num_players).map(|i| init_public(self.spec, i)).collect(),
            Some((&last, head)) => {
                let (pi, g) = self.get(head);
                update_public_all(self.spec, &pi, &g, last)
            }
        };
        let g = self.gammas(public, &pi);
        self.cache.insert(public.to_vec(), (pi.clone(), g.clone()));
        (pi, g)
    }

    /// ξ^i_t along own observations `xs` (stages 0..=t) and public actions `a`.
    pub fn private(&mut self, i: usize, xs: &[usize], a: &[usize]) -> Result<PrivateBelief> {
        let mut xi = init_private(self.spec, i, xs[0])?;
        for s in 0..a.len() {
            let (pi, g) = self.get(&a[..s]);
            xi = update_private_belief(self.spec, i, &xi, &pi, &g, a[s], xs[s + 1])?;
        }
        Ok(xi)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionalIndependenceReport {
    /// Zero-based stage.
    pub stage: usize,
    /// (v, public history) pairs with positive probability.
    pub public_histories: usize,
    /// max |P(ξ_t | v, a) - Π_i P(ξ^i_t | v, a)|.
    pub belief_deviation: f64,
    /// max |P(x_{1:t} | v, a) - Π_i P(x^i_{1:t} | v, a)|.
    pub observation_deviation: f64,
}

type Grouped = BTreeMap<(usize, Vec<usize>), Vec<usize>>;

fn by_public(nodes: &[HistoryNode]) -> Grouped {
    let mut g: Grouped = BTreeMap::new();
    for (k, n) in nodes.iter().enumerate() {
        g.entry((n.v, n.a.clone())).or_default().push(k);
    }
    g
}

/// max over tuples of |joint - product of marginals|; `keys[k][i]` is
/// player i's component for item k.
fn factor_gap(keys: &[Vec<Vec<i64>>], probs: &[f64]) -> f64 {
    let n = keys[0].len();
    let total: f64 = probs.iter().sum();
    let mut joint: BTreeMap<Vec<Vec<i64>>, f64> = BTreeMap::new();
    let mut marg: Vec<BTreeMap<Vec<i64>, f64>> = vec![BTreeMap::new(); n];
    for (k, p) in keys.iter().zip(probs) {
        *joint.entry(k.clone()).or_default() += p / total;
        for i in 0..n {
            *marg[i].entry(k[i].clone()).or_default() += p / total;
        }
    }
    let supports: Vec<Vec<(&Vec<i64>, f64)>> = marg.iter().map(|m| m.iter().map(|(k, p)| (k, *p)).collect()).collect();
    let mut gap = 0.0_f64;
    let mut idx = vec![0usize; n];
    loop {
        let tuple: Vec<Vec<i64>> = (0..n).map(|i| supports[i][idx[i]].0.clone()).collect();
        let prod: f64 = (0..n).map(|i| supports[i][idx[i]].1).product();
        gap = gap.max((joint.get(&tuple).copied().unwrap_or(0.0) - prod).abs());
        let mut r = n;
        loop {
            if r == 0 {
                return gap;
            }
            r -= 1;
            idx[r] += 1;
            if idx[r] < supports[r].len() {
                break;
            }
            idx[r] = 0;
        }
    }
}

fn independence_at(spec: &DiscreteGameSpec, en: &Enumeration, t: usize) -> ConditionalIndependenceReport {
    let nodes = &en.stages[t];
    let groups = by_public(nodes);
    let (mut bd, mut od) = (0.0_f64, 0.0_f64);
    for members in groups.values() {
        let probs: Vec<f64> = members.iter().map(|&k| nodes[k].prob).collect();
        let bkeys: Vec<Vec<Vec<i64>>> =
            members.iter().map(|&k| (0..spec.num_players).map(|i| quantize(&en.beliefs[t][k][i])).collect()).collect();
        let xkeys: Vec<Vec<Vec<i64>>> = members
            .iter()
            .map(|&k| (0..spec.num_players).map(|i| nodes[k].x.iter().map(|xs| xs[i] as i64).collect()).collect())
            .collect();
        bd = bd.max(factor_gap(&bkeys, &probs));
        od = od.max(factor_gap(&xkeys, &probs));
    }
    ConditionalIndependenceReport { stage: t, public_histories: groups.len(), belief_deviation: bd, observation_deviation: od }
}

/// Factorization of the conditional public belief and of the observation
/// likelihood across players at zero-based stage `t`, by full enumeration.
pub fn verify_conditional_independence(
    spec: &DiscreteGameSpec,
    policy: &dyn StructuredPolicy,
    t: usize,
    caps: &Caps,
) -> Result<ConditionalIndependenceReport> {
    let en = enumerate_histories(spec, policy, t + 1, caps)?;
    Ok(independence_at(spec, &en, t))
}

/// Recursion-versus-oracle gaps at one stage. All entries are maximum
/// absolute differences of probabilities.
#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub stage: usize,
    pub histories: usize,
    pub factorization_belief: f64,
    pub factorization_observation: f64,
    /// Private belief from the recursion against P(v | own information).
    pub private_update: f64,
    /// π^i_t from the recursion against P(ξ^i_t | v, public history).
    pub public_update: f64,
    /// Belief over others' beliefs against P(ξ^{-i}_t | own information).
    pub hierarchy: f64,
    /// Markov kernel against the enumerated transition; absent at the last stage.
    pub markov: Option<f64>,
}

impl OracleReport {
    pub fn worst(&self) -> f64 {
        [self.factorization_belief, self.factorization_observation, self.private_update, self.public_update, self.hierarchy]
            .into_iter()
            .chain(self.markov)
            .fold(0.0, f64::max)
    }
}

fn concat<'b>(parts: impl IntoIterator<Item = &'b [f64]>) -> Vec<f64> {
    parts.into_iter().flat_map(|p| p.iter().copied()).collect()
}

fn key_vec(pi: &[ConditionalPublicBelief], xi: &[f64]) -> Vec<f64> {
    public_key(pi).into_iter().map(|k| k as f64).chain(xi.iter().copied()).collect()
}

/// Runs every oracle comparison at every stage.
pub fn oracle_report(spec: &DiscreteGameSpec, policy: &dyn StructuredPolicy, caps: &Caps) -> Result<Vec<OracleReport>> {
    let en = enumerate_histories(spec, policy, spec.horizon, caps)?;
    let mut path = PublicPath::new(spec, policy);
    let n = spec.num_players;
    let mut out = Vec::new();
    for t in 0..spec.horizon {
        let nodes = &en.stages[t];
        let ind = independence_at(spec, &en, t);
        let mut rep = OracleReport {
            stage: t,
            histories: nodes.len(),
            factorization_belief: ind.belief_deviation,
            factorization_observation: ind.observation_deviation,
            private_update: 0.0,
            public_update: 0.0,
            hierarchy: 0.0,
            markov: None,
        };
        // Private beliefs by recursion, once per information set.
        let mut rec_xi: Vec<BTreeMap<(Vec<usize>, Vec<usize>), Option<PrivateBelief>>> = vec![BTreeMap::new(); n];
        for (k, node) in nodes.iter().enumerate() {
            for i in 0..n {
                let key = node.info_key(i);
                let xi = rec_xi[i].entry(key.clone()).or_insert_with(|| path.private(i, &key.0, &key.1).ok());
                let gap = xi.as_ref().map_or(f64::INFINITY, |b| b.dist(&en.beliefs[t][k][i]));
                rep.private_update = rep.private_update.max(gap);
            }
        }
        for ((v, public), members) in by_public(nodes) {
            let (pi, _) = path.get(&public);
            let total: f64 = members.iter().map(|&k| nodes[k].prob).sum();
            for i in 0..n {
                let oracle: Vec<(Vec<f64>, f64)> =
                    members.iter().map(|&k| (en.beliefs[t][k][i].clone(), nodes[k].prob / total)).collect();
                let rec: Vec<(Vec<f64>, f64)> = pi[i].particles.iter().map(|p| (p.belief.probs.clone(), p.weights[v])).collect();
                rep.public_update = rep.public_update.max(distribution_gap(&oracle, &rec));
            }
        }
        for i in 0..n {
            let mut sets: BTreeMap<(Vec<usize>, Vec<usize>), Vec<usize>> = BTreeMap::new();
            for (k, node) in nodes.iter().enumerate() {
                sets.entry(node.info_key(i)).or_default().push(k);
            }
            for (key, members) in &sets {
                let Some(xi) = rec_xi[i][key].clone() else { continue };
                let (pi, _) = path.get(&key.1);
                let total: f64 = members.iter().map(|&k| nodes[k].prob).sum();
                let oracle: Vec<(Vec<f64>, f64)> = members
                    .iter()
                    .map(|&k| {
                        let parts = (0..n).filter(|&j| j != i).map(|j| en.beliefs[t][k][j].as_slice());
                        (concat(parts), nodes[k].prob / total)
                    })
                    .collect();
                let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                let rec: Vec<(Vec<f64>, f64)> = belief_over_others(spec, i, &xi, &pi)
                    .into_iter()
                    .map(|(idx, p)| {
                        let parts = others.iter().zip(&idx).map(|(&j, &q)| pi[j].particles[q].belief.probs.as_slice());
                        (concat(parts), p)
                    })
                    .collect();
                rep.hierarchy = rep.hierarchy.max(distribution_gap(&oracle, &rec));
            }
            if t + 1 < spec.horizon {
                let next = &en.stages[t + 1];
                let mut trans: BTreeMap<((Vec<usize>, Vec<usize>), usize), Vec<(Vec<f64>, f64)>> = BTreeMap::new();
                for (k, node) in next.iter().enumerate() {
                    let parent = &nodes[node.parent.expect("stage > 0 has a parent")];
                    let ai = spec.joint_actions(node.a[t])[i];
                    let (pi_next, _) = path.get(&node.a);
                    trans
                        .entry((parent.info_key(i), ai))
                        .or_default()
                        .push((key_vec(&pi_next, &en.beliefs[t + 1][k][i]), node.prob));
                }
                let mut worst = 0.0_f64;
                for ((key, ai), mut oracle) in trans {
                    let total: f64 = oracle.iter().map(|e| e.1).sum();
                    oracle.iter_mut().for_each(|e| e.1 /= total);
                    let Some(xi) = rec_xi[i][&key].clone() else {
                        worst = f64::INFINITY;
                        continue;
                    };
                    let (pi, g) = path.get(&key.1);
                    let rec: Vec<(Vec<f64>, f64)> =
                        markov_kernel(spec, i, &xi, &pi, &g, ai).into_iter().map(|(p, b, q)| (key_vec(&p, &b.probs), q)).collect();
                    worst = worst.max(distribution_gap(&oracle, &rec));
                }
                rep.markov = Some(rep.markov.unwrap_or(0.0).max(worst));
            }
        }
        out.push(rep);
    }
    Ok(out)
}
