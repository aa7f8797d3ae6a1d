use crate::layouts::StageLayouts;
use crate::lift::lift_reward;
use crate::propagate::propagate_value;
use crate::value::Quad;
use crate::COND_LIMIT;
use lqg_filter::{PublicStage, StageGains};
use pbe_core::blocks::{get, set};
use pbe_core::linalg::{eigenvalues_sym, symmetrize};
use pbe_core::{Blk, Error, LinearStageStrategy, LqgGameSpec, Mat, Result, Vector};

#[derive(Clone, Debug)]
pub struct StageSolution {
    pub strategy: LinearStageStrategy,
    /// Value at stage t as a quadratic in `[v̂^i; f]`.
    pub value: Quad,
    /// Stage objective over `[v̂^i; a^i; f]` (lifted reward plus continuation).
    pub objective: Quad,
    pub lifted: Quad,
    pub continuation: Quad,
}

/// Lifted reward and continuation for player i at stage t. `gains` and
/// `next` are `None` at the last stage.
pub fn stage_objective(
    spec: &LqgGameSpec,
    stage: &PublicStage,
    gains: Option<&StageGains>,
    t: usize,
    i: usize,
    strat: &[LinearStageStrategy],
    next: Option<&Quad>,
) -> (Quad, Quad, Quad) {
    let (n, nv, na) = (spec.num_players, spec.state_dim, spec.action_dim);
    let lifted = lift_reward(spec, stage, t, i, strat);
    let cont = match (gains, next) {
        (Some(g), Some(q)) => propagate_value(spec, stage, g, i, strat, q).quad,
        _ => Quad::zeros(StageLayouts::new(n, nv, na, i).dec.dim()),
    };
    let obj = Quad {
        m: symmetrize(&(&lifted.m + &cont.m)),
        b: &lifted.b + &cont.b,
        c: lifted.c + cont.c,
    };
    (obj, lifted, cont)
}

/// Maximizes the stage objective over a^i and returns the linear maximizer
/// with the resulting value quadratic.
pub fn best_response_stage(
    spec: &LqgGameSpec,
    stage: &PublicStage,
    gains: Option<&StageGains>,
    t: usize,
    i: usize,
    strat: &[LinearStageStrategy],
    next: Option<&Quad>,
) -> Result<StageSolution> {
    solve_stage_problem(spec, stage, gains, t, i, strat, next, true)
}

/// Stationary point of the stage objective. With `checked = false` the
/// second-order and conditioning checks are skipped (Newton trial points).
#[allow(clippy::too_many_arguments)]
pub(crate) fn solve_stage_problem(
    spec: &LqgGameSpec,
    stage: &PublicStage,
    gains: Option<&StageGains>,
    t: usize,
    i: usize,
    strat: &[LinearStageStrategy],
    next: Option<&Quad>,
    checked: bool,
) -> Result<StageSolution> {
    let (n, nv, na) = (spec.num_players, spec.state_dim, spec.action_dim);
    let ly = StageLayouts::new(n, nv, na, i);
    let dec = &ly.dec;
    let (obj, lifted, continuation) = stage_objective(spec, stage, gains, t, i, strat, next);
    let (ar, vr, fr) = (dec.range(Blk::A(i)), dec.range(Blk::Vh(i)), StageLayouts::f_range(dec, n));
    let waa = get(&obj.m, ar.clone(), ar.clone());
    if checked {
        let ev = eigenvalues_sym(&waa);
        let hi = ev.max();
        if !(hi < 0.0) {
            return Err(Error::SecondOrder { player: i + 1, stage: t + 1, max_eig: hi });
        }
        let mags = ev.map(f64::abs);
        let cond = mags.max() / mags.min();
        if cond > COND_LIMIT {
            return Err(Error::IllConditioned { player: i + 1, stage: t + 1, cond });
        }
    }
    let neg_inv = (-&waa).try_inverse().ok_or_else(|| {
        Error::Numerical(format!("W_aa of player {} at stage {} not invertible", i + 1, t + 1))
    })?;
    let l = &neg_inv * get(&obj.m, ar.clone(), vr.clone());
    let m = &neg_inv * get(&obj.m, ar.clone(), fr.clone());
    let m_bar = (&neg_inv * obj.b.rows(ar.start, na)) * 0.5;

    let val = &ly.val;
    let mut th = Mat::zeros(dec.dim(), val.dim());
    set(&mut th, vr.clone(), val.range(Blk::Vh(i)), &Mat::identity(nv, nv));
    set(&mut th, ar.clone(), val.range(Blk::Vh(i)), &l);
    set(&mut th, ar.clone(), StageLayouts::f_range(val, n), &m);
    set(&mut th, fr, StageLayouts::f_range(val, n), &Mat::identity(n * nv, n * nv));
    let mut mh = Vector::zeros(dec.dim());
    mh.rows_mut(ar.start, na).copy_from(&m_bar);
    let zm = symmetrize(&(th.transpose() * &obj.m * &th));
    let zl = (mh.transpose() * &obj.m * &th * 2.0 + obj.b.transpose() * &th).transpose();
    let o = (mh.transpose() * &obj.m * &mh)[(0, 0)] + obj.b.dot(&mh) + obj.c;
    Ok(StageSolution {
        strategy: LinearStageStrategy { l, m, m_bar },
        value: Quad { m: zm, b: zl, c: o },
        objective: obj,
        lifted,
        continuation,
    })
}
