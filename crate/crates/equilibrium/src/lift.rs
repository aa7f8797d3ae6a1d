use crate::layouts::StageLayouts;
use crate::value::Quad;
use lqg_filter::PublicStage;
use pbe_core::blocks::{get, others, set};
use pbe_core::linalg::symmetrize;
use pbe_core::{Blk, LinearStageStrategy, LqgGameSpec, Mat, Vector};

/// Player i's expected stage-t reward as a quadratic in `[v̂^i; a^i; f]`,
/// given that the others follow `strat`.
pub fn lift_reward(
    spec: &LqgGameSpec,
    stage: &PublicStage,
    t: usize,
    i: usize,
    strat: &[LinearStageStrategy],
) -> Quad {
    let (n, nv, na) = (spec.num_players, spec.state_dim, spec.action_dim);
    let ly = StageLayouts::new(n, nv, na, i);
    let (rew, dec) = (&ly.rew, &ly.dec);
    let fr = StageLayouts::f_range(rew, n);
    let oth = others(n, i);

    // [v; a^1..a^N] = B u + mo with u over the reward layout
    let dr = spec.reward_dim();
    let aslot = |j: usize| nv + j * na..nv + (j + 1) * na;
    let mut b = Mat::zeros(dr, rew.dim());
    let mut mo = Vector::zeros(dr);
    set(&mut b, 0..nv, rew.range(Blk::V), &Mat::identity(nv, nv));
    set(&mut b, aslot(i), rew.range(Blk::A(i)), &Mat::identity(na, na));
    for &j in &oth {
        set(&mut b, aslot(j), rew.range(Blk::Vh(j)), &strat[j].l);
        set(&mut b, aslot(j), fr.clone(), &strat[j].m);
        mo.rows_mut(aslot(j).start, na).copy_from(&strat[j].m_bar);
    }
    let r = spec.reward(i, t);
    let rt = symmetrize(&(b.transpose() * r * &b));
    let bt = (mo.transpose() * r * &b).transpose() * 2.0;
    let ct = (mo.transpose() * r * &mo)[(0, 0)];

    // u = Λ d + noise, noise covariance Σ̄
    let mut lam = Mat::zeros(rew.dim(), dec.dim());
    let dfr = StageLayouts::f_range(dec, n);
    set(&mut lam, rew.range(Blk::V), dec.range(Blk::Vh(i)), &Mat::identity(nv, nv));
    set(&mut lam, rew.range(Blk::A(i)), dec.range(Blk::A(i)), &Mat::identity(na, na));
    set(&mut lam, fr.clone(), dfr.clone(), &Mat::identity(n * nv, n * nv));
    for &j in &oth {
        set(&mut lam, rew.range(Blk::Vh(j)), dec.range(Blk::Vh(i)), &stage.e_block(j, nv));
        set(&mut lam, rew.range(Blk::Vh(j)), dec.range(Blk::F(j)), &Mat::identity(nv, nv));
    }
    let sigma_bar = reward_noise_cov(spec, stage, i, &ly);

    let m = symmetrize(&(lam.transpose() * &rt * &lam));
    let bl = lam.transpose() * bt;
    let c = (&rt * sigma_bar).trace() + ct;
    Quad { m, b: bl, c }
}

/// Covariance of `[v; a^i; v̂^{-i}; f]` around its mean given player i's information.
pub(crate) fn reward_noise_cov(spec: &LqgGameSpec, stage: &PublicStage, i: usize, ly: &StageLayouts) -> Mat {
    let (n, nv) = (spec.num_players, spec.state_dim);
    let rew = &ly.rew;
    let si = stage.sigma_v(i, nv);
    let svv = stage.sigma_others(i, nv);
    let oth = others(n, i);
    let mut s = Mat::zeros(rew.dim(), rew.dim());
    set(&mut s, rew.range(Blk::V), rew.range(Blk::V), &si);
    for (r, &j) in oth.iter().enumerate() {
        let cross = &si * stage.e_block(j, nv).transpose();
        set(&mut s, rew.range(Blk::V), rew.range(Blk::Vh(j)), &cross);
        set(&mut s, rew.range(Blk::Vh(j)), rew.range(Blk::V), &cross.transpose());
        for (q, &k) in oth.iter().enumerate() {
            let blk = get(&svv, r * nv..(r + 1) * nv, q * nv..(q + 1) * nv);
            set(&mut s, rew.range(Blk::Vh(j)), rew.range(Blk::Vh(k)), &blk);
        }
    }
    s
}
