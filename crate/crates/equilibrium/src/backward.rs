use crate::stage::{solve_stage_problem, StageSolution};
use crate::value::Quad;
use lqg_filter::Trajectory;
use pbe_core::{LqgGameSpec, Profile, Result};

#[derive(Clone, Debug)]
pub struct BackwardOutput {
    pub profile: Profile,
    /// Value quadratics indexed `[t][player]`.
    pub values: Vec<Vec<Quad>>,
}

impl BackwardOutput {
    pub fn stage1(&self) -> &[Quad] {
        &self.values[0]
    }
}

/// Solves every player's stage problem at stage t against `strat`.
pub(crate) fn solve_stage(
    spec: &LqgGameSpec,
    tr: &Trajectory,
    t: usize,
    strat: &[pbe_core::LinearStageStrategy],
    next: Option<&[Quad]>,
    checked: bool,
) -> Result<Vec<StageSolution>> {
    let gains = tr.gains.get(t);
    (0..spec.num_players)
        .map(|i| solve_stage_problem(spec, &tr.stages[t], gains, t, i, strat, next.map(|q| &q[i]), checked))
        .collect()
}

/// One backward pass against `profile`, whose forward quantities are `tr`.
///
/// With `inner = Some((tol, max_iters))` each stage is iterated on its own
/// strategies (forward quantities held fixed) before moving to the previous stage.
pub fn backward_pass(
    spec: &LqgGameSpec,
    tr: &Trajectory,
    profile: &Profile,
    inner: Option<(f64, usize)>,
) -> Result<BackwardOutput> {
    backward_pass_with(spec, tr, profile, inner, true)
}

pub(crate) fn backward_pass_with(
    spec: &LqgGameSpec,
    tr: &Trajectory,
    profile: &Profile,
    inner: Option<(f64, usize)>,
    checked: bool,
) -> Result<BackwardOutput> {
    let tt = spec.horizon;
    let mut out_p = profile.clone();
    let mut values: Vec<Vec<Quad>> = vec![vec![]; tt];
    for t in (0..tt).rev() {
        let next = if t + 1 < tt { Some(values[t + 1].as_slice()) } else { None };
        let mut strat = profile[t].clone();
        let (tol, max) = inner.unwrap_or((0.0, 1));
        let mut sols = Vec::new();
        for _ in 0..max.max(1) {
            sols = solve_stage(spec, tr, t, &strat, next, checked)?;
            let d = sols.iter().zip(&strat).map(|(s, o)| s.strategy.max_abs_diff(o)).fold(0.0, f64::max);
            if inner.is_none() {
                break;
            }
            strat = sols.iter().map(|s| s.strategy.clone()).collect();
            if d < tol {
                break;
            }
        }
        out_p[t] = sols.iter().map(|s| s.strategy.clone()).collect();
        values[t] = sols.into_iter().map(|s| s.value).collect();
    }
    Ok(BackwardOutput { profile: out_p, values })
}
