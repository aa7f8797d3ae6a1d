//! Finite game specification.
//!
//! Joint actions are indexed in mixed radix with player 0 most significant.
//! The previous-action argument of the observation kernel uses index 0 for
//! the "no action" sentinel at t = 1 and `1 + joint` afterwards.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const NO_ACTION: &str = "none";

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteGameSpec {
    pub num_players: usize,
    pub horizon: usize,
    pub state_values: Vec<String>,
    pub prior: Vec<f64>,
    pub obs_values: Vec<Vec<String>>,
    pub action_values: Vec<Vec<String>>,
    /// `[player][v][prev][x]`, prev as described in the module docs.
    pub obs_kernel: Vec<Vec<Vec<Vec<f64>>>>,
    /// `[player][t][v][joint]`.
    pub rewards: Vec<Vec<Vec<Vec<f64>>>>,
    pub constant_rewards: bool,
}

pub(crate) type Table<T> = BTreeMap<String, T>;

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum RewardTables {
    Constant { constant: bool, table: Table<Table<f64>> },
    PerStage(Vec<Table<Table<f64>>>),
}

#[derive(Serialize, Deserialize)]
pub(crate) struct DiscreteFile {
    pub num_players: usize,
    pub horizon: usize,
    pub state_values: Vec<String>,
    pub prior: Vec<f64>,
    pub obs_values: Vec<Vec<String>>,
    pub action_values: Vec<Vec<String>>,
    pub obs_kernel: Vec<Table<Table<Vec<f64>>>>,
    pub rewards: Vec<RewardTables>,
}

impl DiscreteGameSpec {
    pub fn num_states(&self) -> usize {
        self.state_values.len()
    }

    pub fn num_actions(&self, i: usize) -> usize {
        self.action_values[i].len()
    }

    pub fn num_obs(&self, i: usize) -> usize {
        self.obs_values[i].len()
    }

    pub fn num_joint(&self) -> usize {
        (0..self.num_players).map(|i| self.num_actions(i)).product()
    }

    /// Mixed-radix joint index of per-player action indices.
    pub fn joint_index(&self, a: &[usize]) -> usize {
        let mut k = 0;
        for (i, &ai) in a.iter().enumerate() {
            k = k * self.num_actions(i) + ai;
        }
        k
    }

    pub fn joint_actions(&self, k: usize) -> Vec<usize> {
        let mut out = vec![0; self.num_players];
        let mut k = k;
        for i in (0..self.num_players).rev() {
            out[i] = k % self.num_actions(i);
            k /= self.num_actions(i);
        }
        out
    }

    pub fn joint_key(&self, k: usize) -> String {
        self.joint_actions(k)
            .iter()
            .enumerate()
            .map(|(i, &a)| self.action_values[i][a].as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Q_X^i(x | v, prev). `prev` is `None` at t = 1.
    pub fn kernel(&self, i: usize, v: usize, prev: Option<usize>, x: usize) -> f64 {
        self.obs_kernel[i][v][prev.map_or(0, |k| k + 1)][x]
    }

    pub fn reward(&self, i: usize, t: usize, v: usize, joint: usize) -> f64 {
        self.rewards[i][t][v][joint]
    }

    pub(crate) fn from_file(f: DiscreteFile) -> Result<Self> {
        let n = f.num_players;
        if n == 0 || f.horizon == 0 {
            return Err(Error::validation("num_players and horizon must be positive"));
        }
        let nv = f.state_values.len();
        if nv == 0 {
            return Err(Error::validation("state_values is empty"));
        }
        if f.prior.len() != nv {
            return Err(Error::validation("prior length differs from state_values"));
        }
        if f.prior.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::validation("prior has negative entries"));
        }
        if (f.prior.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::validation("prior not normalized"));
        }
        for (what, v) in [("obs_values", &f.obs_values), ("action_values", &f.action_values)] {
            if v.len() != n {
                return Err(Error::validation(format!("{what} must have one list per player")));
            }
            if let Some(i) = v.iter().position(|l| l.is_empty()) {
                return Err(Error::validation(format!("{what}[{i}] is empty")));
            }
        }
        let mut spec = DiscreteGameSpec {
            num_players: n,
            horizon: f.horizon,
            state_values: f.state_values,
            prior: f.prior,
            obs_values: f.obs_values,
            action_values: f.action_values,
            obs_kernel: Vec::new(),
            rewards: Vec::new(),
            constant_rewards: false,
        };
        let nj = spec.num_joint();
        let prev_keys: Vec<String> = std::iter::once(NO_ACTION.to_string())
            .chain((0..nj).map(|k| spec.joint_key(k)))
            .collect();
        if f.obs_kernel.len() != n {
            return Err(Error::validation("obs_kernel must have one table per player"));
        }
        for (i, tab) in f.obs_kernel.iter().enumerate() {
            let mut per_v = Vec::new();
            for v in &spec.state_values {
                let row = tab.get(v).ok_or_else(|| {
                    Error::validation(format!("obs_kernel[{i}] missing state {v}"))
                })?;
                let mut per_prev = Vec::new();
                for pk in &prev_keys {
                    let p = row.get(pk).ok_or_else(|| {
                        Error::validation(format!("obs_kernel[{i}][{v}] missing previous action {pk}"))
                    })?;
                    if p.len() != spec.num_obs(i) {
                        return Err(Error::validation(format!(
                            "obs_kernel[{i}][{v}][{pk}] has wrong length"
                        )));
                    }
                    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                        return Err(Error::validation(format!(
                            "obs_kernel[{i}][{v}][{pk}] has negative entries"
                        )));
                    }
                    if (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                        return Err(Error::validation(format!(
                            "obs_kernel[{i}][{v}][{pk}] not normalized"
                        )));
                    }
                    per_prev.push(p.clone());
                }
                per_v.push(per_prev);
            }
            spec.obs_kernel.push(per_v);
        }
        if f.rewards.len() != n {
            return Err(Error::validation("rewards must have one entry per player"));
        }
        let mut all_const = true;
        for (i, r) in f.rewards.iter().enumerate() {
            let tables: Vec<&Table<Table<f64>>> = match r {
                RewardTables::Constant { constant, table } => {
                    if !constant {
                        return Err(Error::validation("reward object form requires constant: true"));
                    }
                    vec![table; spec.horizon]
                }
                RewardTables::PerStage(v) => {
                    all_const = false;
                    if v.len() != spec.horizon {
                        return Err(Error::validation(format!(
                            "rewards[{i}] has {} stages, expected {}",
                            v.len(),
                            spec.horizon
                        )));
                    }
                    v.iter().collect()
                }
            };
            let mut per_t = Vec::new();
            for (t, tab) in tables.iter().enumerate() {
                let mut per_v = Vec::new();
                for v in &spec.state_values {
                    let row = tab.get(v).ok_or_else(|| {
                        Error::validation(format!("rewards[{i}][{t}] missing state {v}"))
                    })?;
                    let mut per_j = Vec::new();
                    for k in 0..nj {
                        let key = spec.joint_key(k);
                        let x = row.get(&key).ok_or_else(|| {
                            Error::validation(format!("rewards[{i}][{t}][{v}] missing joint action {key}"))
                        })?;
                        if !x.is_finite() {
                            return Err(Error::validation(format!(
                                "rewards[{i}][{t}][{v}][{key}] not finite"
                            )));
                        }
                        per_j.push(*x);
                    }
                    per_v.push(per_j);
                }
                per_t.push(per_v);
            }
            spec.rewards.push(per_t);
        }
        spec.constant_rewards = all_const;
        Ok(spec)
    }

    pub(crate) fn to_file(&self) -> DiscreteFile {
        let nj = self.num_joint();
        let obs_kernel = (0..self.num_players)
            .map(|i| {
                self.state_values
                    .iter()
                    .enumerate()
                    .map(|(v, vk)| {
                        let mut row = Table::new();
                        row.insert(NO_ACTION.to_string(), self.obs_kernel[i][v][0].clone());
                        for k in 0..nj {
                            row.insert(self.joint_key(k), self.obs_kernel[i][v][k + 1].clone());
                        }
                        (vk.clone(), row)
                    })
                    .collect()
            })
            .collect();
        let table = |i: usize, t: usize| -> Table<Table<f64>> {
            self.state_values
                .iter()
                .enumerate()
                .map(|(v, vk)| {
                    let row = (0..nj).map(|k| (self.joint_key(k), self.rewards[i][t][v][k])).collect();
                    (vk.clone(), row)
                })
                .collect()
        };
        let rewards = (0..self.num_players)
            .map(|i| {
                if self.constant_rewards {
                    RewardTables::Constant { constant: true, table: table(i, 0) }
                } else {
                    RewardTables::PerStage((0..self.horizon).map(|t| table(i, t)).collect())
                }
            })
            .collect();
        DiscreteFile {
            num_players: self.num_players,
            horizon: self.horizon,
            state_values: self.state_values.clone(),
            prior: self.prior.clone(),
            obs_values: self.obs_values.clone(),
            action_values: self.action_values.clone(),
            obs_kernel,
            rewards,
        }
    }
}
