use crate::backward::{backward_pass_with, BackwardOutput};
use crate::newton::newton_sweep;
use crate::value::{expected_equilibrium_value, expected_player_values, Quad};
use lqg_filter::{forward_pass, Trajectory};
use pbe_core::strategy::{constant_profile, profile_diff};
use pbe_core::{Error, LqgGameSpec, Method, Profile, Result, RunConfig};
use serde::Serialize;
use std::time::Instant;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub epsilon: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub profile: Profile,
    pub trajectory: Trajectory,
    /// `[t][player]`
    pub values: Vec<Vec<Quad>>,
    pub converged: bool,
    pub iterations: usize,
    /// max |γ(profile) - profile| for the returned profile
    pub residual: f64,
    pub log: Vec<IterationRecord>,
    pub seconds: f64,
}

impl Solution {
    pub fn player_values(&self, spec: &LqgGameSpec) -> Vec<f64> {
        expected_player_values(spec, &self.trajectory, &self.values[0])
    }

    pub fn game_value(&self, spec: &LqgGameSpec) -> f64 {
        expected_equilibrium_value(spec, &self.trajectory, &self.values[0])
    }
}

fn inner(run: &RunConfig) -> Option<(f64, usize)> {
    run.inner_fixed_point.then_some((run.convergence_tol * 1e-2, 100))
}

fn one_pass(spec: &LqgGameSpec, p: &Profile, run: &RunConfig, checked: bool) -> Result<(Trajectory, BackwardOutput)> {
    let tr = forward_pass(spec, p, run.pinv_tol)?;
    let out = backward_pass_with(spec, &tr, p, inner(run), checked)?;
    Ok((tr, out))
}

fn check_finite(p: &Profile, k: usize) -> Result<()> {
    let ok = p.iter().flatten().all(|s| {
        s.l.iter().chain(s.m.iter()).chain(s.m_bar.iter()).all(|x| x.is_finite())
    });
    if ok {
        Ok(())
    } else {
        Err(Error::Numerical(format!("iterate {k} has non-finite strategies")))
    }
}

/// Fixed-point search for a linear structured equilibrium.
///
/// Returns the last iterate with `converged = false` when the iteration
/// budget runs out; numerical failures are errors.
pub fn solve_equilibrium(spec: &LqgGameSpec, run: &RunConfig) -> Result<Solution> {
    run.validate()?;
    let start = Instant::now();
    let mut p = constant_profile(spec, run.init_gain);
    let mut log = Vec::new();
    let mut converged = false;
    for k in 1..=run.max_outer_iters {
        let eps = match run.method {
            Method::Lagged => {
                let (_, out) = one_pass(spec, &p, run, true)?;
                let eps = profile_diff(&out.profile, &p);
                p = if run.damping > 0.0 && eps >= run.convergence_tol {
                    blend(&out.profile, &p, run.damping)
                } else {
                    out.profile
                };
                eps
            }
            Method::BackwardNewton => {
                newton_sweep(spec, &mut p, k == 1, run.pinv_tol)?;
                // intermediate sweeps may pass through saddle stages
                let (_, out) = one_pass(spec, &p, run, false)?;
                profile_diff(&out.profile, &p)
            }
        };
        check_finite(&p, k)?;
        log.push(IterationRecord { k, epsilon: eps });
        if !eps.is_finite() {
            return Err(Error::Numerical(format!("iterate {k} has non-finite change")));
        }
        if eps < run.convergence_tol {
            converged = true;
            break;
        }
    }
    let (trajectory, out) = one_pass(spec, &p, run, true)?;
    let residual = profile_diff(&out.profile, &p);
    Ok(Solution {
        profile: p,
        trajectory,
        values: out.values,
        converged,
        iterations: log.len(),
        residual,
        log,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn blend(new: &Profile, old: &Profile, lambda: f64) -> Profile {
    new.iter()
        .zip(old)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.blend(y, lambda)).collect())
        .collect()
}
