use crate::public::{private_transition, StageGains};
use pbe_core::blocks::{others, set};
use pbe_core::{LqgGameSpec, Mat};

/// Player i's view of one step as a linear Gaussian system
/// `s_{t+1} = A s_t + D a^i_t + H w + const`, `y_{t+1} = C s_{t+1} + noise`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrivateFilterModel {
    pub a: Mat,
    pub d: Mat,
    pub h: Mat,
    /// covariance of w (the other players' observation noise)
    pub w_cov: Mat,
    pub c: Mat,
    /// observation noise covariance, `diag(0, Q^i)`
    pub r: Mat,
    pub j: Mat,
}

pub fn build_private_model(spec: &LqgGameSpec, g: &StageGains, i: usize) -> PrivateFilterModel {
    let (n, nv, na) = (spec.num_players, spec.state_dim, spec.action_dim);
    let (a, h, w_cov) = private_transition(spec, i, &g.gv, &g.gvh, &g.jx);
    let mut d = Mat::zeros(n * nv, na);
    for (r, &j) in others(n, i).iter().enumerate() {
        set(&mut d, nv + r * nv..nv + (r + 1) * nv, 0..na, &g.ja_block(j, i, na));
    }
    let p = g.c[i].nrows();
    let mut rn = Mat::zeros(p, p);
    set(&mut rn, p - nv..p, p - nv..p, &spec.obs_noise_cov[i]);
    PrivateFilterModel { a, d, h, w_cov, c: g.c[i].clone(), r: rn, j: g.j[i].clone() }
}
