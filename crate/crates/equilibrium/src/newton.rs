use crate::backward::solve_stage;
use crate::value::Quad;
use lqg_filter::forward_prefix;
use pbe_core::{LinearStageStrategy, LqgGameSpec, Mat, Profile, Result, Vector};

/// First-sweep seed for stage t: stage t + 1's gains scaled up. Equilibrium
/// gains grow toward the start of long horizons, and starting near zero
/// lands on the degenerate branch where W_aa blows up.
const SEED_SCALE: f64 = 1.5;
const STAGE_TOL: f64 = 1e-12;
const STAGE_MAX_ITERS: usize = 50;

fn pack(s: &[LinearStageStrategy]) -> Vector {
    let v: Vec<f64> = s
        .iter()
        .flat_map(|x| x.l.iter().chain(x.m.iter()).chain(x.m_bar.iter()).cloned().collect::<Vec<_>>())
        .collect();
    Vector::from_vec(v)
}

fn unpack(x: &Vector, s: &mut [LinearStageStrategy]) {
    let mut it = x.iter();
    for st in s.iter_mut() {
        for v in st.l.iter_mut().chain(st.m.iter_mut()).chain(st.m_bar.iter_mut()) {
            *v = *it.next().expect("length matches");
        }
    }
}

struct StageProblem<'a> {
    spec: &'a LqgGameSpec,
    t: usize,
    next: Option<&'a [Quad]>,
    pinv_tol: f64,
}

impl StageProblem<'_> {
    /// Best response to x minus x, with the stage values at x.
    fn residual(&self, profile: &mut Profile, x: &Vector) -> Result<(Vector, Vec<Quad>)> {
        unpack(x, &mut profile[self.t]);
        let tr = forward_prefix(self.spec, profile, self.t + 2, self.pinv_tol)?;
        let sols = solve_stage(self.spec, &tr, self.t, &profile[self.t], self.next, false)?;
        let y = pack(&sols.iter().map(|s| s.strategy.clone()).collect::<Vec<_>>());
        Ok((y - x, sols.into_iter().map(|s| s.value).collect()))
    }
}

/// Backward sweep solving each stage's own fixed point by Newton's method with a
/// finite-difference Jacobian. Forward quantities are recomputed at every trial.
pub(crate) fn newton_sweep(spec: &LqgGameSpec, profile: &mut Profile, seed: bool, pinv_tol: f64) -> Result<()> {
    let tt = spec.horizon;
    let mut next: Option<Vec<Quad>> = None;
    for t in (0..tt).rev() {
        if seed && t + 1 < tt {
            profile[t] = profile[t + 1].clone();
            for s in profile[t].iter_mut() {
                s.l *= SEED_SCALE;
            }
        }
        let prob = StageProblem { spec, t, next: next.as_deref(), pinv_tol };
        let mut x = pack(&profile[t]);
        let (mut r, mut vals) = prob.residual(profile, &x)?;
        for _ in 0..STAGE_MAX_ITERS {
            let rn = r.amax();
            if rn < STAGE_TOL {
                break;
            }
            let n = x.len();
            let mut jm = Mat::zeros(n, n);
            for c in 0..n {
                let h = 1e-7 * x[c].abs().max(1.0);
                let mut xp = x.clone();
                xp[c] += h;
                let (rp, _) = prob.residual(profile, &xp)?;
                jm.set_column(c, &((rp - &r) / h));
            }
            let dx = match jm.svd(true, true).solve(&(-&r), 1e-14) {
                Ok(d) => d,
                Err(_) => break,
            };
            let mut step = 1.0;
            let mut accepted = None;
            while step > 1e-4 {
                let xt = &x + &dx * step;
                if let Ok((rt, vt)) = prob.residual(profile, &xt) {
                    if rt.amax() < rn {
                        accepted = Some((xt, rt, vt));
                        break;
                    }
                }
                step /= 2.0;
            }
            match accepted {
                Some((xt, rt, vt)) => {
                    x = xt;
                    r = rt;
                    vals = vt;
                }
                None => break,
            }
        }
        unpack(&x, &mut profile[t]);
        next = Some(vals);
    }
    Ok(())
}
