//! Linear stage strategies `a^i_t = L v̂^i_t + M f_t + m̄`.

use crate::linalg::{from_rows, max_abs_diff, row_major, to_rows};
use crate::{LqgGameSpec, Mat, Vector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub struct LinearStageStrategy {
    /// N_a x N_v
    pub l: Mat,
    /// N_a x (N N_v)
    pub m: Mat,
    pub m_bar: Vector,
}

impl LinearStageStrategy {
    pub fn zeros(na: usize, nv: usize, n: usize) -> Self {
        LinearStageStrategy { l: Mat::zeros(na, nv), m: Mat::zeros(na, n * nv), m_bar: Vector::zeros(na) }
    }

    pub fn action(&self, vhat: &Vector, f: &Vector) -> Vector {
        &self.l * vhat + &self.m * f + &self.m_bar
    }

    /// Realized offset m^i_t = M f + m̄.
    pub fn offset(&self, f: &Vector) -> Vector {
        &self.m * f + &self.m_bar
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let mb = self.m_bar.iter().zip(o.m_bar.iter()).fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
        max_abs_diff(&self.l, &o.l).max(max_abs_diff(&self.m, &o.m)).max(mb)
    }

    /// (1 - lambda) * self + lambda * old
    pub fn blend(&self, old: &Self, lambda: f64) -> Self {
        LinearStageStrategy {
            l: &self.l * (1.0 - lambda) + &old.l * lambda,
            m: &self.m * (1.0 - lambda) + &old.m * lambda,
            m_bar: &self.m_bar * (1.0 - lambda) + &old.m_bar * lambda,
        }
    }
}

/// Strategies indexed `[t][player]`.
pub type Profile = Vec<Vec<LinearStageStrategy>>;

pub fn zero_profile(spec: &LqgGameSpec) -> Profile {
    constant_profile(spec, 0.0)
}

pub fn constant_profile(spec: &LqgGameSpec, gain: f64) -> Profile {
    let (n, nv, na) = (spec.num_players, spec.state_dim, spec.action_dim);
    (0..spec.horizon)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let mut s = LinearStageStrategy::zeros(na, nv, n);
                    s.l.fill(gain);
                    s
                })
                .collect()
        })
        .collect()
}

pub fn profile_diff(a: &Profile, b: &Profile) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.max_abs_diff(q)))
        .fold(0.0, f64::max)
}

/// On-disk form of one stage strategy. Matrices are row-major nested arrays.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StrategyRecord {
    pub player: usize,
    pub t: usize,
    #[serde(rename = "L")]
    pub l: Vec<Vec<f64>>,
    #[serde(rename = "M")]
    pub m: Vec<Vec<f64>>,
    pub m_bar: Vec<f64>,
}

pub fn profile_to_records(p: &Profile) -> Vec<StrategyRecord> {
    let mut out = Vec::new();
    for (t, stage) in p.iter().enumerate() {
        for (i, s) in stage.iter().enumerate() {
            out.push(StrategyRecord {
                player: i + 1,
                t: t + 1,
                l: to_rows(&s.l),
                m: to_rows(&s.m),
                m_bar: s.m_bar.iter().cloned().collect(),
            });
        }
    }
    out
}

pub fn profile_from_records(recs: &[StrategyRecord], spec: &LqgGameSpec) -> crate::Result<Profile> {
    let mut p = zero_profile(spec);
    let mut seen = vec![vec![false; spec.num_players]; spec.horizon];
    for r in recs {
        if r.t == 0 || r.t > spec.horizon || r.player == 0 || r.player > spec.num_players {
            return Err(crate::Error::validation(format!(
                "strategy record (player {}, t {}) out of range",
                r.player, r.t
            )));
        }
        let s = LinearStageStrategy {
            l: from_rows(&r.l),
            m: from_rows(&r.m),
            m_bar: Vector::from_vec(r.m_bar.clone()),
        };
        let want = LinearStageStrategy::zeros(spec.action_dim, spec.state_dim, spec.num_players);
        if s.l.shape() != want.l.shape() || s.m.shape() != want.m.shape() || s.m_bar.len() != want.m_bar.len() {
            return Err(crate::Error::validation(format!(
                "strategy record (player {}, t {}) has wrong dimensions",
                r.player, r.t
            )));
        }
        seen[r.t - 1][r.player - 1] = true;
        p[r.t - 1][r.player - 1] = s;
    }
    if seen.iter().flatten().any(|x| !x) {
        return Err(crate::Error::validation("strategy file does not cover every (player, t)"));
    }
    Ok(p)
}

pub fn flat(m: &Mat) -> Vec<f64> {
    row_major(m)
}
