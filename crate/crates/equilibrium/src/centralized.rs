//! Single controller that sees every signal, picks every action and
//! collects the summed reward.
//!
//! V is static and nobody's observations depend on actions, so today's
//! action has no effect on tomorrow's information or payoff. The planner's
//! problem separates across stages and the myopic maximizer is optimal.

use pbe_core::blocks::get;
use pbe_core::linalg::{eigenvalues_sym, pinv_sym, symmetrize, vstack};
use pbe_core::{Error, LqgGameSpec, Mat, Result};

#[derive(Clone, Debug)]
pub struct CentralizedSolution {
    /// All actions at stage t are `gains[t] * E[V | all signals]`.
    pub gains: Vec<Mat>,
    /// Posterior covariance of V after stage-t signals.
    pub posterior: Vec<Mat>,
    /// Expected summed reward at each stage.
    pub stage_values: Vec<f64>,
    /// Sum of stage values divided by the horizon.
    pub value_per_time: f64,
}

pub fn solve_centralized(spec: &LqgGameSpec, pinv_tol: f64) -> Result<CentralizedSolution> {
    let (n, nv) = (spec.num_players, spec.state_dim);
    let h = vstack(&vec![Mat::identity(nv, nv); n]);
    let r = pbe_core::linalg::block_diag(&spec.obs_noise_cov);
    let sigma = &spec.prior_cov;
    let mut p = sigma.clone();
    let (mut gains, mut post, mut vals) = (vec![], vec![], vec![]);
    for t in 0..spec.horizon {
        let s = symmetrize(&(&h * &p * h.transpose() + &r));
        p = symmetrize(&(&p - &p * h.transpose() * pinv_sym(&s, pinv_tol) * &h * &p));
        let total = (0..n).fold(Mat::zeros(spec.reward_dim(), spec.reward_dim()), |acc, i| acc + spec.reward(i, t));
        let d = total.nrows();
        let rvv = get(&total, 0..nv, 0..nv);
        let rav = get(&total, nv..d, 0..nv);
        let raa = get(&total, nv..d, nv..d);
        let hi = eigenvalues_sym(&raa).max();
        if !(hi < 0.0) {
            return Err(Error::SecondOrder { player: 0, stage: t + 1, max_eig: hi });
        }
        let neg_inv = (-&raa)
            .cholesky()
            .ok_or_else(|| Error::Numerical("summed action block not invertible".into()))?
            .inverse();
        let g = &neg_inv * &rav;
        // max_a [v;a]'R[v;a] at a = g v̂ leaves v̂'(R_vv + R_va g) v̂
        let schur = symmetrize(&(&rvv + rav.transpose() * &g));
        let est_cov = sigma - &p;
        vals.push((schur * est_cov).trace() + (&rvv * &p).trace());
        gains.push(g);
        post.push(p.clone());
    }
    let value_per_time = vals.iter().sum::<f64>() / spec.horizon as f64;
    Ok(CentralizedSolution { gains, posterior: post, stage_values: vals, value_per_time })
}
