use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Outer solver scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Forward pass, then a backward pass whose right-hand sides use the
    /// previous iterate. Repeated until the strategy change is below tolerance.
    #[default]
    Lagged,
    /// Backward sweep that solves each stage's own fixed point with Newton
    /// steps (forward quantities recomputed for every trial point), seeded
    /// from the already solved later stage.
    BackwardNewton,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub master_seed: u64,
    #[serde(default = "d_iters")]
    pub max_outer_iters: usize,
    #[serde(default = "d_tol")]
    pub convergence_tol: f64,
    #[serde(default)]
    pub damping: f64,
    #[serde(default = "d_pinv")]
    pub pinv_tol: f64,
    #[serde(default = "d_traj")]
    pub num_trajectories: usize,
    #[serde(default)]
    pub inner_fixed_point: bool,
    #[serde(default)]
    pub method: Method,
    /// Constant used for every entry of L in the first iterate (0 by default).
    #[serde(default)]
    pub init_gain: f64,
}

fn d_iters() -> usize {
    500
}
fn d_tol() -> f64 {
    1e-8
}
fn d_pinv() -> f64 {
    1e-10
}
fn d_traj() -> usize {
    100_000
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            master_seed: 0,
            max_outer_iters: d_iters(),
            convergence_tol: d_tol(),
            damping: 0.0,
            pinv_tol: d_pinv(),
            num_trajectories: d_traj(),
            inner_fixed_point: false,
            method: Method::Lagged,
            init_gain: 0.0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.convergence_tol > 0.0) {
            return Err(Error::validation("convergence_tol must be strictly positive"));
        }
        if !(self.pinv_tol > 0.0) {
            return Err(Error::validation("pinv_tol must be strictly positive"));
        }
        if !(0.0..=1.0).contains(&self.damping) {
            return Err(Error::validation("damping must lie in [0, 1]"));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::validation("max_outer_iters must be at least 1"));
        }
        if !self.init_gain.is_finite() {
            return Err(Error::validation("init_gain must be finite"));
        }
        Ok(())
    }
}
