use crate::public::{PublicStage, StageGains};
use pbe_core::blocks::others;
use pbe_core::{LqgGameSpec, Mat, Vector};

/// Player i's running estimate v̂^i_t.
#[derive(Clone, Debug, PartialEq)]
pub struct PrivateFilterState {
    pub t: usize,
    pub vhat: Vector,
}

pub fn init_private(basis_gain: &Mat, x1: &Vector) -> PrivateFilterState {
    PrivateFilterState { t: 0, vhat: basis_gain * x1 }
}

/// v̂^i_{t+1} from the realized actions of stage t and the fresh signal.
///
/// `l`, `f`, `a`, `m` are the stage-t gains, public offset, actions and
/// action offsets of every player.
#[allow(clippy::too_many_arguments)]
pub fn private_step(
    spec: &LqgGameSpec,
    g: &StageGains,
    i: usize,
    st: &PrivateFilterState,
    l: &[Mat],
    f: &Vector,
    a: &[Vector],
    m: &[Vector],
    x_next: &Vector,
) -> PrivateFilterState {
    let (n, nv, na) = (spec.num_players, spec.state_dim, spec.action_dim);
    let oth = others(n, i);
    let mut y = Vector::zeros(oth.len() * na);
    for (r, &j) in oth.iter().enumerate() {
        let v = &a[j] - &m[j] - &l[j] * f.rows(j * nv, nv);
        y.rows_mut(r * na, na).copy_from(&v);
    }
    let vhat = &g.gvh[i] * &st.vhat + &g.jx[i] * x_next + &g.ja[i] * y;
    PrivateFilterState { t: st.t + 1, vhat }
}

/// Player i's estimate of the other players' estimates, `E^{-i}_t v̂^i_t + f^{-i}_t`.
pub fn estimate_of_estimates(stage: &PublicStage, i: usize, vhat: &Vector, f: &Vector, nv: usize) -> Vector {
    let n = stage.e.nrows() / nv;
    let oth = others(n, i);
    let mut out = Vector::zeros(oth.len() * nv);
    for (r, &j) in oth.iter().enumerate() {
        let v = stage.e_block(j, nv) * vhat + f.rows(j * nv, nv);
        out.rows_mut(r * nv, nv).copy_from(&v);
    }
    out
}
