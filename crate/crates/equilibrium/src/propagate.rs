use crate::layouts::StageLayouts;
use crate::value::Quad;
use lqg_filter::{PublicStage, StageGains};
use pbe_core::blocks::{add, others, set};
use pbe_core::linalg::{block_diag, symmetrize};
use pbe_core::{Blk, LinearStageStrategy, LqgGameSpec, Mat, Vector};

/// Pieces of the continuation-value transfer for player i at stage t.
#[derive(Clone, Debug)]
pub struct Propagation {
    /// `[v̂^i_{t+1}; f_{t+1}] = Ĝ u + ĝ`, u over the propagation layout.
    pub g: Mat,
    pub g0: Vector,
    /// Mean of u given the decision variables: `u = T d + noise`.
    pub tmap: Mat,
    /// Covariance of that noise.
    pub sigma_hat: Mat,
    /// Expected next value as a quadratic in `[v̂^i; a^i; f]`.
    pub quad: Quad,
}

/// Next-state map for player i when everyone else follows `strat` and
/// the public attributes `strat[i]` to player i.
///
/// The v̂^i row carries `+ J^i_{a^j} L^j` on `f^j`. Realized play subtracts
/// that term (see `lqg_filter::private_step`); the value recursion keeps the
/// added form, which is the one that reproduces the reference gain tables.
pub fn next_state_map(
    spec: &LqgGameSpec,
    g: &StageGains,
    i: usize,
    strat: &[LinearStageStrategy],
) -> (Mat, Vector) {
    let (n, nv, na) = (spec.num_players, spec.state_dim, spec.action_dim);
    let ly = StageLayouts::new(n, nv, na, i);
    let (p, val) = (&ly.prop, &ly.val);
    let pf = StageLayouts::f_range(p, n);
    let l: Vec<Mat> = strat.iter().map(|s| s.l.clone()).collect();
    let mut gm = Mat::zeros(val.dim(), p.dim());
    let mut g0 = Vector::zeros(val.dim());

    let vi = val.range(Blk::Vh(i));
    set(&mut gm, vi.clone(), p.range(Blk::Vh(i)), &g.gvh[i]);
    set(&mut gm, vi.clone(), p.range(Blk::X(i)), &g.jx[i]);
    for j in others(n, i) {
        let blk = g.ja_block(i, j, na) * &l[j];
        set(&mut gm, vi.clone(), p.range(Blk::Vh(j)), &blk);
        set(&mut gm, vi.clone(), p.range(Blk::F(j)), &blk);
    }

    let fm = &g.gt_vh - &g.aj_va * block_diag(&l);
    let jb = |k: usize, j: usize| if k == j { Mat::zeros(nv, na) } else { g.ja_block(k, j, na) };
    for k in 0..n {
        let rk = val.range(Blk::F(k));
        let fm_k = fm.rows(k * nv, nv).into_owned();
        add(&mut gm, rk.clone(), pf.clone(), &fm_k);
        for j in others(n, k) {
            add(&mut gm, rk.clone(), p.range(Blk::F(j)), &(-(jb(k, j) * &l[j])));
        }
        let coef = g.aj_block(k, i, nv, na) + jb(k, i);
        add(&mut gm, rk.clone(), p.range(Blk::A(i)), &coef);
        add(&mut gm, rk.clone(), pf.clone(), &(-(&coef * &strat[i].m)));
        let mut gk = g0.rows_mut(rk.start, nv);
        gk -= &coef * &strat[i].m_bar;
        for j in others(n, i) {
            let c2 = g.aj_block(k, j, nv, na) + jb(k, j);
            add(&mut gm, rk.clone(), p.range(Blk::Vh(j)), &(c2 * &l[j]));
        }
    }
    (gm, g0)
}

/// Expected `V_{t+1}` as a quadratic in player i's stage-t decision variables.
pub fn propagate_value(
    spec: &LqgGameSpec,
    stage: &PublicStage,
    g: &StageGains,
    i: usize,
    strat: &[LinearStageStrategy],
    next: &Quad,
) -> Propagation {
    let (n, nv, na) = (spec.num_players, spec.state_dim, spec.action_dim);
    let ly = StageLayouts::new(n, nv, na, i);
    let (p, dec) = (&ly.prop, &ly.dec);
    let (gm, g0) = next_state_map(spec, g, i, strat);

    let mut tm = Mat::zeros(p.dim(), dec.dim());
    let id = |d: usize| Mat::identity(d, d);
    set(&mut tm, p.range(Blk::Vh(i)), dec.range(Blk::Vh(i)), &id(nv));
    set(&mut tm, p.range(Blk::A(i)), dec.range(Blk::A(i)), &id(na));
    set(&mut tm, p.range(Blk::X(i)), dec.range(Blk::Vh(i)), &id(nv));
    set(&mut tm, StageLayouts::f_range(p, n), StageLayouts::f_range(dec, n), &id(n * nv));
    for j in others(n, i) {
        set(&mut tm, p.range(Blk::Vh(j)), dec.range(Blk::Vh(i)), &stage.e_block(j, nv));
        add(&mut tm, p.range(Blk::Vh(j)), dec.range(Blk::F(j)), &id(nv));
    }

    let si = stage.sigma_v(i, nv);
    let svv = stage.sigma_others(i, nv);
    let eo = stage.e_others(i, nv);
    let mut sh = Mat::zeros(p.dim(), p.dim());
    let no = (n - 1) * nv;
    if no > 0 {
        let o0 = p.range(Blk::Vh(others(n, i)[0])).start;
        set(&mut sh, o0..o0 + no, o0..o0 + no, &svv);
        let cross = &eo * &si;
        set(&mut sh, o0..o0 + no, p.range(Blk::X(i)), &cross);
        set(&mut sh, p.range(Blk::X(i)), o0..o0 + no, &cross.transpose());
    }
    set(&mut sh, p.range(Blk::X(i)), p.range(Blk::X(i)), &(&si + &spec.obs_noise_cov[i]));

    let gzg = gm.transpose() * &next.m * &gm;
    let m = symmetrize(&(tm.transpose() * &gzg * &tm));
    let lin = (g0.transpose() * &next.m * &gm * 2.0 + next.b.transpose() * &gm) * &tm;
    let c = (g0.transpose() * &next.m * &g0)[(0, 0)] + (&gzg * &sh).trace() + next.b.dot(&g0) + next.c;
    Propagation { g: gm, g0, tmap: tm, sigma_hat: sh, quad: Quad { m, b: lin.transpose(), c } }
}
