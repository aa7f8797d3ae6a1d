//! Candidate structured profiles θ: π_t -> γ_t, their verification by
//! backward dynamic programming over (π_t, ξ^i_t), and exhaustive search over
//! deterministic candidates for small games.

use crate::belief::{
    expected_reward, init_private, init_public, outcomes, point_mass, public_key, quantize, update_private_or_reset,
    update_public_all, ConditionalPublicBelief, PartialStrategy, PrivateBelief, Rule,
};
use crate::enumerate::StructuredPolicy;
use crate::Caps;
use pbe_core::{DiscreteGameSpec, Error, Result};
use serde::Serialize;
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// Tie tolerance when comparing action values.
pub const VALUE_TOL: f64 = 1e-12;

pub trait Theta {
    /// γ_t for every player at public belief `pi`.
    fn gamma(&self, t: usize, pi: &[ConditionalPublicBelief]) -> Result<Vec<PartialStrategy>>;
}

type Entry = (Vec<ConditionalPublicBelief>, Vec<PartialStrategy>);

/// θ given as a finite table keyed by stage and public belief.
#[derive(Clone, Debug, Default)]
pub struct TableTheta {
    pub entries: BTreeMap<(usize, Vec<i64>), Entry>,
}

impl Theta for TableTheta {
    fn gamma(&self, t: usize, pi: &[ConditionalPublicBelief]) -> Result<Vec<PartialStrategy>> {
        self.entries
            .get(&(t, public_key(pi)))
            .map(|e| e.1.clone())
            .ok_or_else(|| Error::validation(format!("candidate is not defined at this public belief (stage {})", t + 1)))
    }
}

#[derive(Debug, Serialize)]
pub struct ThetaRow {
    pub belief: Vec<f64>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct ThetaEntry {
    pub stage: usize,
    pub public_belief: Vec<ConditionalPublicBelief>,
    /// `gamma[i]`: tabulated rows of player i's partial strategy.
    pub gamma: Vec<Vec<ThetaRow>>,
}

impl TableTheta {
    pub fn to_entries(&self) -> Vec<ThetaEntry> {
        self.entries
            .iter()
            .map(|((t, _), (pi, g))| ThetaEntry {
                stage: t + 1,
                public_belief: pi.clone(),
                gamma: g
                    .iter()
                    .map(|s| s.table.iter().map(|(b, p)| ThetaRow { belief: b.clone(), probs: p.clone() }).collect())
                    .collect(),
            })
            .collect()
    }
}

/// θ that ignores π: player i at stage t plays `rule(i, t, ξ)`.
#[derive(Clone)]
pub struct BeliefRuleTheta {
    pub rule: Arc<dyn Fn(usize, usize, &[f64]) -> Vec<f64> + Send + Sync>,
}

impl Theta for BeliefRuleTheta {
    fn gamma(&self, t: usize, pi: &[ConditionalPublicBelief]) -> Result<Vec<PartialStrategy>> {
        Ok((0..pi.len())
            .map(|i| {
                let r = self.rule.clone();
                let f: Rule = Arc::new(move |b| r(i, t, b));
                PartialStrategy::rule(f)
            })
            .collect())
    }
}

/// A candidate θ played along public histories, for use with the enumeration
/// oracle. π is carried forward with θ's own γ. Lookups that fail are
/// recorded and answered with a uniform mix; check [`ThetaPolicy::take_error`].
pub struct ThetaPolicy<'a> {
    spec: &'a DiscreteGameSpec,
    theta: &'a dyn Theta,
    cache: RefCell<BTreeMap<Vec<usize>, Entry>>,
    error: RefCell<Option<Error>>,
}

impl<'a> ThetaPolicy<'a> {
    pub fn new(spec: &'a DiscreteGameSpec, theta: &'a dyn Theta) -> Self {
        ThetaPolicy { spec, theta, cache: RefCell::new(BTreeMap::new()), error: RefCell::new(None) }
    }

    /// First failed lookup, if any. Clears it.
    pub fn take_error(&self) -> Option<Error> {
        self.error.borrow_mut().take()
    }

    fn entry(&self, public: &[usize]) -> Result<Entry> {
        if let Some(e) = self.cache.borrow().get(public) {
            return Ok(e.clone());
        }
        let pi = match public.split_last() {
            None => (0..self.spec.num_players).map(|i| init_public(self.spec, i)).collect(),
            Some((&last, head)) => {
                let (pi, g) = self.entry(head)?;
                update_public_all(self.spec, &pi, &g, last)
            }
        };
        let g = self.theta.gamma(public.len(), &pi)?;
        self.cache.borrow_mut().insert(public.to_vec(), (pi.clone(), g.clone()));
        Ok((pi, g))
    }
}

impl StructuredPolicy for ThetaPolicy<'_> {
    fn probs(&self, i: usize, _t: usize, public: &[usize], xi: &[f64]) -> Vec<f64> {
        match self.entry(public) {
            Ok((_, g)) => g[i].probs(xi),
            Err(e) => {
                self.error.borrow_mut().get_or_insert(e);
                let na = self.spec.num_actions(i);
                vec![1.0 / na as f64; na]
            }
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct StageGain {
    pub stage: usize,
    /// Distinct (π, ξ^i) states visited, including deviation-only ones.
    pub states: usize,
    /// max over states and actions of Q(a) - value of the candidate, both
    /// with the candidate's continuation.
    pub one_shot_gain: f64,
    /// max over states of optimal value - candidate value.
    pub total_gain: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    /// `players[i][t]`.
    pub players: Vec<Vec<StageGain>>,
    /// Expected total reward of each player under the candidate.
    pub values: Vec<f64>,
    pub max_one_shot_gain: f64,
    pub max_total_gain: f64,
    pub tolerance: f64,
    pub certified: bool,
}

struct Dp<'a> {
    spec: &'a DiscreteGameSpec,
    theta: &'a dyn Theta,
    i: usize,
    gammas: HashMap<(usize, Vec<i64>), Vec<PartialStrategy>>,
    memo: HashMap<(usize, Vec<i64>, Vec<i64>), (f64, f64)>,
    stats: Vec<StageGain>,
}

impl Dp<'_> {
    fn gamma(&mut self, t: usize, pi: &[ConditionalPublicBelief], key: &[i64]) -> Result<Vec<PartialStrategy>> {
        let k = (t, key.to_vec());
        if let Some(g) = self.gammas.get(&k) {
            return Ok(g.clone());
        }
        let g = self.theta.gamma(t, pi)?;
        self.gammas.insert(k, g.clone());
        Ok(g)
    }

    /// (optimal value, candidate value) at (t, π, ξ^i).
    fn value(&mut self, t: usize, pi: &[ConditionalPublicBelief], xi: &PrivateBelief) -> Result<(f64, f64)> {
        if t == self.spec.horizon {
            return Ok((0.0, 0.0));
        }
        let key = public_key(pi);
        let mk = (t, key.clone(), quantize(&xi.probs));
        if let Some(&r) = self.memo.get(&mk) {
            return Ok(r);
        }
        let (spec, i) = (self.spec, self.i);
        let g = self.gamma(t, pi, &key)?;
        let na = spec.num_actions(i);
        let (mut qj, mut qv) = (vec![0.0; na], vec![0.0; na]);
        for a in 0..na {
            let r = expected_reward(spec, i, t, xi, pi, &g, a);
            let (mut cj, mut cv) = (0.0, 0.0);
            let mut next: Option<(usize, Vec<ConditionalPublicBelief>)> = None;
            for o in outcomes(spec, i, xi, pi, &g, a) {
                if next.as_ref().map_or(true, |(k, _)| *k != o.joint) {
                    next = Some((o.joint, update_public_all(spec, pi, &g, o.joint)));
                }
                let np = next.as_ref().unwrap().1.clone();
                let nx = update_private_or_reset(spec, i, xi, pi, &g, o.joint, o.x);
                let (j, v) = self.value(t + 1, &np, &nx)?;
                cj += o.prob * j;
                cv += o.prob * v;
            }
            qj[a] = r + cj;
            qv[a] = r + cv;
        }
        let probs = g[i].probs(&xi.probs);
        let cand: f64 = probs.iter().zip(&qv).map(|(p, q)| p * q).sum();
        let best = qj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let one_shot = qv.iter().copied().fold(f64::NEG_INFINITY, f64::max) - cand;
        let s = &mut self.stats[t];
        s.states += 1;
        s.one_shot_gain = s.one_shot_gain.max(one_shot);
        s.total_gain = s.total_gain.max(best - cand);
        self.memo.insert(mk, (best, cand));
        Ok((best, cand))
    }
}

/// Checks a candidate θ by solving each player's MDP over (π_t, ξ^i_t) with
/// the others fixed to θ and π updated with θ's γ, over every state reachable
/// from stage 1 under any own actions.
pub fn verify_equilibrium(spec: &DiscreteGameSpec, theta: &dyn Theta, tolerance: f64, caps: &Caps) -> Result<VerificationReport> {
    caps.check(spec)?;
    let pi: Vec<ConditionalPublicBelief> = (0..spec.num_players).map(|i| init_public(spec, i)).collect();
    let mut players = Vec::new();
    let mut values = Vec::new();
    for i in 0..spec.num_players {
        let stats = (0..spec.horizon).map(|t| StageGain { stage: t + 1, ..StageGain::default() }).collect();
        let mut dp = Dp { spec, theta, i, gammas: HashMap::new(), memo: HashMap::new(), stats };
        let mut total = 0.0;
        for x in 0..spec.num_obs(i) {
            let px: f64 = (0..spec.num_states()).map(|v| spec.prior[v] * spec.kernel(i, v, None, x)).sum();
            if px > 0.0 {
                let xi = init_private(spec, i, x)?;
                total += px * dp.value(0, &pi, &xi)?.1;
            }
        }
        values.push(total);
        players.push(dp.stats);
    }
    let all = players.iter().flatten();
    let max_one_shot_gain = all.clone().map(|s| s.one_shot_gain).fold(0.0, f64::max);
    let max_total_gain = all.map(|s| s.total_gain).fold(0.0, f64::max);
    Ok(VerificationReport {
        players,
        values,
        max_one_shot_gain,
        max_total_gain,
        tolerance,
        certified: max_one_shot_gain <= tolerance && max_total_gain <= tolerance,
    })
}

struct Search<'a> {
    spec: &'a DiscreteGameSpec,
    caps: &'a Caps,
    table: TableTheta,
    memo: HashMap<(usize, usize, Vec<i64>, Vec<i64>), f64>,
}

fn argmax(q: &[f64]) -> usize {
    let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    q.iter().position(|&x| x >= best - VALUE_TOL).unwrap_or(0)
}

impl Search<'_> {
    /// Action values of player i at (t, π, ξ) when everyone plays `g` now
    /// and the solved θ afterwards.
    fn action_values(&mut self, i: usize, t: usize, pi: &[ConditionalPublicBelief], g: &[PartialStrategy], xi: &PrivateBelief) -> Result<Vec<f64>> {
        let spec = self.spec;
        let mut q = Vec::with_capacity(spec.num_actions(i));
        for a in 0..spec.num_actions(i) {
            let mut val = expected_reward(spec, i, t, xi, pi, g, a);
            let mut next: Option<(usize, Vec<ConditionalPublicBelief>)> = None;
            for o in outcomes(spec, i, xi, pi, g, a) {
                if next.as_ref().map_or(true, |(k, _)| *k != o.joint) {
                    next = Some((o.joint, update_public_all(spec, pi, g, o.joint)));
                }
                let np = next.as_ref().unwrap().1.clone();
                let nx = update_private_or_reset(spec, i, xi, pi, g, o.joint, o.x);
                val += o.prob * self.optimal(i, t + 1, &np, &nx)?;
            }
            q.push(val);
        }
        Ok(q)
    }

    /// Player i's optimal value at (t, π, ξ). Beliefs outside π's particle
    /// set get their optimal action written into the table.
    fn optimal(&mut self, i: usize, t: usize, pi: &[ConditionalPublicBelief], xi: &PrivateBelief) -> Result<f64> {
        if t == self.spec.horizon {
            return Ok(0.0);
        }
        let key = public_key(pi);
        let mk = (i, t, key.clone(), quantize(&xi.probs));
        if let Some(&v) = self.memo.get(&mk) {
            return Ok(v);
        }
        let g = self.solve_at(t, pi)?;
        let q = self.action_values(i, t, pi, &g, xi)?;
        let a = argmax(&q);
        if pi[i].find(&xi.probs).is_none() {
            let e = self.table.entries.get_mut(&(t, key)).expect("solved stage is tabulated");
            e.1[i].set(&xi.probs, point_mass(self.spec.num_actions(i), a));
        }
        self.memo.insert(mk, q[a]);
        Ok(q[a])
    }

    fn solve_at(&mut self, t: usize, pi: &[ConditionalPublicBelief]) -> Result<Vec<PartialStrategy>> {
        let key = (t, public_key(pi));
        if let Some(e) = self.table.entries.get(&key) {
            return Ok(e.1.clone());
        }
        let spec = self.spec;
        let n = spec.num_players;
        let sizes: Vec<usize> = (0..n).map(|i| spec.num_actions(i).pow(pi[i].particles.len() as u32)).collect();
        let total = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s)).unwrap_or(usize::MAX);
        if total > self.caps.max_profiles {
            return Err(Error::Cap(format!("{total} deterministic stage profiles at stage {}", t + 1)));
        }
        for c in 0..total {
            let mut rest = c;
            let g: Vec<PartialStrategy> = (0..n)
                .map(|i| {
                    let na = spec.num_actions(i);
                    let rows = pi[i]
                        .particles
                        .iter()
                        .map(|p| {
                            let a = rest % na;
                            rest /= na;
                            (p.belief.probs.clone(), point_mass(na, a))
                        })
                        .collect();
                    PartialStrategy::tabulated(rows)
                })
                .collect();
            if self.is_stage_equilibrium(t, pi, &g)? {
                self.table.entries.insert(key, (pi.to_vec(), g.clone()));
                return Ok(g);
            }
        }
        Err(Error::Numerical(format!("no pure structured equilibrium at a public belief of stage {}", t + 1)))
    }

    fn is_stage_equilibrium(&mut self, t: usize, pi: &[ConditionalPublicBelief], g: &[PartialStrategy]) -> Result<bool> {
        for i in 0..self.spec.num_players {
            for p in &pi[i].particles {
                let q = self.action_values(i, t, pi, g, &p.belief)?;
                let chosen = argmax(&g[i].probs(&p.belief.probs));
                let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if q[chosen] < best - VALUE_TOL {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Backward search over deterministic structured profiles: at every public
/// belief reachable under any actions, the first stage profile (in
/// mixed-radix order over particles) that is a mutual best response given
/// the already solved future. Fails when some stage has no pure solution.
pub fn search_equilibrium(spec: &DiscreteGameSpec, caps: &Caps) -> Result<TableTheta> {
    caps.check(spec)?;
    let mut s = Search { spec, caps, table: TableTheta::default(), memo: HashMap::new() };
    let pi: Vec<ConditionalPublicBelief> = (0..spec.num_players).map(|i| init_public(spec, i)).collect();
    s.solve_at(0, &pi)?;
    // Evaluate every player from every first-stage belief so deviation-only
    // states are tabulated too.
    for i in 0..spec.num_players {
        for p in pi[i].particles.clone() {
            s.optimal(i, 0, &pi, &p.belief)?;
        }
    }
    Ok(reachable_part(spec, &s.table, pi))
}

/// Entries at public beliefs reachable from stage 1 under any joint actions
/// when π is updated with the table's own γ. Drops what the search tabulated
/// for candidates it rejected.
fn reachable_part(spec: &DiscreteGameSpec, table: &TableTheta, pi: Vec<ConditionalPublicBelief>) -> TableTheta {
    let mut out = TableTheta::default();
    let mut frontier = vec![pi];
    for t in 0..spec.horizon {
        let mut next = Vec::new();
        for pi in frontier {
            let key = (t, public_key(&pi));
            if out.entries.contains_key(&key) {
                continue;
            }
            let Some(e) = table.entries.get(&key) else { continue };
            if t + 1 < spec.horizon {
                next.extend((0..spec.num_joint()).map(|a| update_public_all(spec, &pi, &e.1, a)));
            }
            out.entries.insert(key, e.clone());
        }
        frontier = next;
    }
    out
}
