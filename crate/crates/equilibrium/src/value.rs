use lqg_filter::Trajectory;
use pbe_core::linalg::quad;
use pbe_core::{LqgGameSpec, Mat, Vector};
use serde::{Deserialize, Serialize};

/// `x' m x + b' x + c`
#[derive(Clone, Debug, PartialEq)]
pub struct Quad {
    pub m: Mat,
    pub b: Vector,
    pub c: f64,
}

impl Quad {
    pub fn zeros(d: usize) -> Self {
        Quad { m: Mat::zeros(d, d), b: Vector::zeros(d), c: 0.0 }
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        quad(&self.m, x) + self.b.dot(x) + self.c
    }
}

/// Player value at one stage, a quadratic in `[v̂^i; f]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueFn {
    #[serde(rename = "Z")]
    pub z: Vec<Vec<f64>>,
    #[serde(rename = "z")]
    pub zl: Vec<f64>,
    pub o: f64,
}

impl ValueFn {
    pub fn from_quad(q: &Quad) -> Self {
        ValueFn { z: pbe_core::linalg::to_rows(&q.m), zl: q.b.iter().cloned().collect(), o: q.c }
    }

    pub fn quad(&self) -> Quad {
        Quad { m: pbe_core::linalg::from_rows(&self.z), b: Vector::from_vec(self.zl.clone()), c: self.o }
    }

    pub fn eval(&self, vhat: &Vector, f: &Vector) -> f64 {
        let mut x = Vector::zeros(vhat.len() + f.len());
        x.rows_mut(0, vhat.len()).copy_from(vhat);
        x.rows_mut(vhat.len(), f.len()).copy_from(f);
        self.quad().eval(&x)
    }
}

/// Ex-ante expected total reward of each player: stage-1 value averaged over
/// v̂^i_1 = K^i x^i_1 with f_1 = 0.
pub fn expected_player_values(spec: &LqgGameSpec, tr: &Trajectory, stage1: &[Quad]) -> Vec<f64> {
    let nv = spec.state_dim;
    (0..spec.num_players)
        .map(|i| {
            let k = &tr.basis_gain[i];
            let cov = k * (&spec.prior_cov + &spec.obs_noise_cov[i]) * k.transpose();
            let zvv = stage1[i].m.view((0, 0), (nv, nv));
            (zvv * cov).trace() + stage1[i].c
        })
        .collect()
}

/// Sum over players of expected total reward, divided by the horizon.
pub fn expected_equilibrium_value(spec: &LqgGameSpec, tr: &Trajectory, stage1: &[Quad]) -> f64 {
    expected_player_values(spec, tr, stage1).iter().sum::<f64>() / spec.horizon as f64
}
