//! Linear-Gaussian game specification.

use crate::linalg::{from_rows, max_abs_diff, min_eig, symmetrize, to_rows};
use crate::{Error, Mat, Result};
use serde::{Deserialize, Serialize};

const PSD_FLOOR: f64 = -1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct LqgGameSpec {
    pub num_players: usize,
    pub horizon: usize,
    pub state_dim: usize,
    pub action_dim: usize,
    /// Σ, prior covariance of V (prior mean is zero).
    pub prior_cov: Mat,
    /// Q^i per player.
    pub obs_noise_cov: Vec<Mat>,
    /// R^i_t indexed `[player][t]`, each over `[v; a^1; ...; a^N]`.
    pub rewards: Vec<Vec<Mat>>,
    /// Whether the file gave one matrix per player for all stages.
    pub constant_rewards: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum RewardFile {
    Constant { constant: bool, matrices: Vec<Vec<Vec<f64>>> },
    PerStage(Vec<Vec<Vec<Vec<f64>>>>),
}

#[derive(Serialize, Deserialize)]
pub(crate) struct LqgFile {
    pub num_players: usize,
    pub horizon: usize,
    pub state_dim: usize,
    pub action_dim: usize,
    pub prior_cov: Vec<Vec<f64>>,
    pub obs_noise_cov: Vec<Vec<Vec<f64>>>,
    pub reward_matrices: RewardFile,
}

fn check_square(m: &[Vec<f64>], n: usize, what: &str) -> Result<Mat> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(Error::validation(format!("{what} must be {n}x{n}")));
    }
    let out = from_rows(m);
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::validation(format!("{what} has non-finite entries")));
    }
    Ok(out)
}

impl LqgGameSpec {
    pub fn reward_dim(&self) -> usize {
        self.state_dim + self.num_players * self.action_dim
    }

    pub fn reward(&self, i: usize, t: usize) -> &Mat {
        &self.rewards[i][t]
    }

    /// Builds a spec from matrices, validating and symmetrizing.
    pub fn new(
        horizon: usize,
        action_dim: usize,
        prior_cov: Mat,
        obs_noise_cov: Vec<Mat>,
        rewards: Vec<Mat>,
    ) -> Result<Self> {
        let n = obs_noise_cov.len();
        let s = LqgGameSpec {
            num_players: n,
            horizon,
            state_dim: prior_cov.nrows(),
            action_dim,
            prior_cov,
            obs_noise_cov,
            rewards: rewards.into_iter().map(|r| vec![r; horizon]).collect(),
            constant_rewards: true,
        };
        s.validated()
    }

    pub(crate) fn from_file(f: LqgFile) -> Result<Self> {
        if f.num_players == 0 {
            return Err(Error::validation("num_players must be positive"));
        }
        if f.horizon == 0 {
            return Err(Error::validation("horizon must be positive"));
        }
        if f.state_dim == 0 || f.action_dim == 0 {
            return Err(Error::validation("state_dim and action_dim must be positive"));
        }
        let nv = f.state_dim;
        let prior = check_square(&f.prior_cov, nv, "prior_cov")?;
        if f.obs_noise_cov.len() != f.num_players {
            return Err(Error::validation(format!(
                "obs_noise_cov has {} entries, expected {}",
                f.obs_noise_cov.len(),
                f.num_players
            )));
        }
        let q = f
            .obs_noise_cov
            .iter()
            .enumerate()
            .map(|(i, m)| check_square(m, nv, &format!("obs_noise_cov[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let dr = nv + f.num_players * f.action_dim;
        let (rewards, constant) = match f.reward_matrices {
            RewardFile::Constant { constant, matrices } => {
                if !constant {
                    return Err(Error::validation(
                        "reward_matrices object form requires constant: true",
                    ));
                }
                if matrices.len() != f.num_players {
                    return Err(Error::validation("reward_matrices must have one matrix per player"));
                }
                let mut out = Vec::new();
                for (i, m) in matrices.iter().enumerate() {
                    let r = check_square(m, dr, &format!("reward_matrices[{i}]"))?;
                    out.push(vec![r; f.horizon]);
                }
                (out, true)
            }
            RewardFile::PerStage(per) => {
                if per.len() != f.num_players {
                    return Err(Error::validation("reward_matrices must be indexed [player][t]"));
                }
                let mut out = Vec::new();
                for (i, stages) in per.iter().enumerate() {
                    if stages.len() != f.horizon {
                        return Err(Error::validation(format!(
                            "reward_matrices[{i}] has {} stages, expected {}",
                            stages.len(),
                            f.horizon
                        )));
                    }
                    let mut row = Vec::new();
                    for (t, m) in stages.iter().enumerate() {
                        row.push(check_square(m, dr, &format!("reward_matrices[{i}][{t}]"))?);
                    }
                    out.push(row);
                }
                (out, false)
            }
        };
        LqgGameSpec {
            num_players: f.num_players,
            horizon: f.horizon,
            state_dim: nv,
            action_dim: f.action_dim,
            prior_cov: prior,
            obs_noise_cov: q,
            rewards,
            constant_rewards: constant,
        }
        .validated()
    }

    fn validated(mut self) -> Result<Self> {
        let nv = self.state_dim;
        if self.prior_cov.shape() != (nv, nv) {
            return Err(Error::validation("prior_cov has wrong shape"));
        }
        if max_abs_diff(&self.prior_cov, &self.prior_cov.transpose()) > 1e-12 {
            return Err(Error::validation("prior_cov not symmetric"));
        }
        self.prior_cov = symmetrize(&self.prior_cov);
        if min_eig(&self.prior_cov) < PSD_FLOOR {
            return Err(Error::validation("prior_cov not positive semidefinite"));
        }
        for (i, q) in self.obs_noise_cov.iter_mut().enumerate() {
            if q.shape() != (nv, nv) {
                return Err(Error::validation(format!("obs_noise_cov[{i}] has wrong shape")));
            }
            if max_abs_diff(q, &q.transpose()) > 1e-12 {
                return Err(Error::validation(format!("obs_noise_cov[{i}] not symmetric")));
            }
            *q = symmetrize(q);
            if min_eig(q) < PSD_FLOOR {
                return Err(Error::validation(format!(
                    "obs_noise_cov[{i}] not positive semidefinite"
                )));
            }
        }
        let dr = self.reward_dim();
        for (i, stages) in self.rewards.iter_mut().enumerate() {
            for (t, r) in stages.iter_mut().enumerate() {
                if r.shape() != (dr, dr) {
                    return Err(Error::validation(format!("reward_matrices[{i}][{t}] has wrong shape")));
                }
                *r = symmetrize(r);
            }
        }
        Ok(self)
    }

    pub(crate) fn to_file(&self) -> LqgFile {
        let reward_matrices = if self.constant_rewards {
            RewardFile::Constant {
                constant: true,
                matrices: self.rewards.iter().map(|s| to_rows(&s[0])).collect(),
            }
        } else {
            RewardFile::PerStage(
                self.rewards.iter().map(|s| s.iter().map(to_rows).collect()).collect(),
            )
        };
        LqgFile {
            num_players: self.num_players,
            horizon: self.horizon,
            state_dim: self.state_dim,
            action_dim: self.action_dim,
            prior_cov: to_rows(&self.prior_cov),
            obs_noise_cov: self.obs_noise_cov.iter().map(to_rows).collect(),
            reward_matrices,
        }
    }

    /// Same game with a different horizon (constant rewards only).
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        if !self.constant_rewards {
            return Err(Error::validation("horizon change needs constant reward matrices"));
        }
        let mut s = self.clone();
        s.horizon = horizon;
        s.rewards = self.rewards.iter().map(|r| vec![r[0].clone(); horizon]).collect();
        Ok(s)
    }
}
