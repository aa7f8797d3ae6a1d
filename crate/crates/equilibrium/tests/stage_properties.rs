//! Stage-level consistency of solved equilibria.

mod common;

use common::{m, planar, scalar};
use lqg_equilibrium::{next_state_map, solve_centralized, solve_equilibrium, stage_objective, Solution, StageLayouts};
use pbe_core::blocks::others;
use pbe_core::linalg::{block_diag, eigenvalues_sym};
use pbe_core::strategy::profile_diff;
use pbe_core::{Blk, Error, LqgGameSpec, Mat, Method, RunConfig, Vector};

fn run() -> RunConfig {
    RunConfig { convergence_tol: 1e-10, ..RunConfig::default() }
}

fn games() -> Vec<(LqgGameSpec, RunConfig)> {
    vec![
        (scalar(1.0, 1.0, 2), run()),
        (scalar(0.0, 2.0, 2), run()),
        (planar([1.0, 1.0], [1.0, 1.0]), run()),
        (planar([0.0, 1.0], [1.0, 0.0]), run()),
        (scalar(1.0, 1.0, 6), RunConfig { method: Method::BackwardNewton, ..run() }),
    ]
}

/// Mean and covariance of `[v; v̂^{-i}]` given player i's information.
fn hidden(sol: &Solution, nv: usize, t: usize, i: usize, vhat: &Vector, f: &Vector) -> (Vector, Mat) {
    let st = &sol.trajectory.stages[t];
    let n = st.e.nrows() / nv;
    let mut mean = Vector::zeros(n * nv);
    mean.rows_mut(0, nv).copy_from(vhat);
    for (r, &j) in others(n, i).iter().enumerate() {
        mean.rows_mut(nv + r * nv, nv).copy_from(&(st.e_block(j, nv) * vhat + f.rows(j * nv, nv)));
    }
    (mean, st.sigma_pred[i].clone())
}

/// E[y' A y + b' y] for y ~ N(mu, s)
fn gauss(a: &Mat, b: &Vector, mu: &Vector, s: &Mat) -> f64 {
    (mu.transpose() * a * mu)[(0, 0)] + (a * s).trace() + b.dot(mu)
}

/// Right side of the Bellman equation evaluated from scratch at the
/// equilibrium action, using the filter covariances directly.
fn bellman_rhs(spec: &LqgGameSpec, sol: &Solution, t: usize, i: usize, vhat: &Vector, f: &Vector) -> f64 {
    let (n, nv, na) = (spec.num_players, spec.state_dim, spec.action_dim);
    let strat = &sol.profile[t];
    let (mu, s) = hidden(sol, nv, t, i, vhat, f);
    let ai = strat[i].action(vhat, f);

    // [v; a] = P y + p0 with y = [v; v̂^{-i}]
    let dr = spec.reward_dim();
    let mut p = Mat::zeros(dr, n * nv);
    let mut p0 = Vector::zeros(dr);
    p.view_mut((0, 0), (nv, nv)).copy_from(&Mat::identity(nv, nv));
    p0.rows_mut(nv + i * na, na).copy_from(&ai);
    for (r, &j) in others(n, i).iter().enumerate() {
        p.view_mut((nv + j * na, nv + r * nv), (na, nv)).copy_from(&strat[j].l);
        p0.rows_mut(nv + j * na, na).copy_from(&strat[j].offset(f));
    }
    let r = spec.reward(i, t);
    let reward = gauss(&(p.transpose() * r * &p), &(p.transpose() * r * &p0 * 2.0), &mu, &s)
        + (p0.transpose() * r * &p0)[(0, 0)];
    if t + 1 == spec.horizon {
        return reward;
    }

    // u = U [y; w^i] + u0 over the next-state layout
    let ly = StageLayouts::new(n, nv, na, i);
    let pl = &ly.prop;
    let dy = n * nv + nv;
    let mut u = Mat::zeros(pl.dim(), dy);
    let mut u0 = Vector::zeros(pl.dim());
    u0.rows_mut(pl.range(Blk::Vh(i)).start, nv).copy_from(vhat);
    u0.rows_mut(pl.range(Blk::A(i)).start, na).copy_from(&ai);
    let fr = StageLayouts::f_range(pl, n);
    u0.rows_mut(fr.start, n * nv).copy_from(f);
    for (r, &j) in others(n, i).iter().enumerate() {
        u.view_mut((pl.range(Blk::Vh(j)).start, nv + r * nv), (nv, nv)).copy_from(&Mat::identity(nv, nv));
    }
    let xr = pl.range(Blk::X(i)).start;
    u.view_mut((xr, 0), (nv, nv)).copy_from(&Mat::identity(nv, nv));
    u.view_mut((xr, n * nv), (nv, nv)).copy_from(&Mat::identity(nv, nv));
    let (g, g0) = next_state_map(spec, &sol.trajectory.gains[t], i, strat);
    let a = &g * &u;
    let a0 = &g * &u0 + g0;
    let z = &sol.values[t + 1][i];
    let mut mu2 = Vector::zeros(dy);
    mu2.rows_mut(0, n * nv).copy_from(&mu);
    let s2 = block_diag(&[s, spec.obs_noise_cov[i].clone()]);
    let cont = gauss(&(a.transpose() * &z.m * &a), &(a.transpose() * (&z.m * &a0 * 2.0 + &z.b)), &mu2, &s2)
        + (a0.transpose() * &z.m * &a0)[(0, 0)]
        + z.b.dot(&a0)
        + z.c;
    reward + cont
}

#[test]
fn bellman_holds_on_a_grid() {
    for (spec, cfg) in games() {
        let sol = solve_equilibrium(&spec, &cfg).unwrap();
        let (n, nv) = (spec.num_players, spec.state_dim);
        let dir = Vector::from_fn(n * nv, |k, _| 1.0 - 0.6 * k as f64);
        for t in 0..spec.horizon {
            for i in 0..n {
                for a in [-2.0, -1.0, 0.0, 0.5, 2.0] {
                    for b in [-1.5, -0.5, 0.0, 1.0, 2.0] {
                        let vhat = Vector::from_fn(nv, |k, _| a * (1.0 + 0.3 * k as f64));
                        let f = &dir * b;
                        let mut x = Vector::zeros(nv + n * nv);
                        x.rows_mut(0, nv).copy_from(&vhat);
                        x.rows_mut(nv, n * nv).copy_from(&f);
                        let lhs = sol.values[t][i].eval(&x);
                        let rhs = bellman_rhs(&spec, &sol, t, i, &vhat, &f);
                        assert!((lhs - rhs).abs() <= 1e-8 * lhs.abs().max(1.0), "t={t} i={i}: {lhs} vs {rhs}");
                    }
                }
            }
        }
    }
}

#[test]
fn first_and_second_order_conditions() {
    for (spec, cfg) in games() {
        let sol = solve_equilibrium(&spec, &cfg).unwrap();
        let (n, nv, na) = (spec.num_players, spec.state_dim, spec.action_dim);
        for t in 0..spec.horizon {
            for i in 0..n {
                let tr = &sol.trajectory;
                let next = sol.values.get(t + 1).map(|v| &v[i]);
                let (obj, _, _) = stage_objective(&spec, &tr.stages[t], tr.gains.get(t), t, i, &sol.profile[t], next);
                let ly = StageLayouts::new(n, nv, na, i);
                let ar = ly.dec.range(Blk::A(i));
                let waa = obj.m.view((ar.start, ar.start), (na, na)).into_owned();
                assert!(eigenvalues_sym(&waa).max() < 0.0);
                let vhat = Vector::from_element(nv, 0.7);
                let f = Vector::from_fn(n * nv, |k, _| 0.3 - 0.2 * k as f64);
                let mut x = Vector::zeros(ly.dec.dim());
                x.rows_mut(0, nv).copy_from(&vhat);
                x.rows_mut(ar.start, na).copy_from(&sol.profile[t][i].action(&vhat, &f));
                x.rows_mut(ar.end, n * nv).copy_from(&f);
                let grad = (&obj.m * &x * 2.0 + &obj.b).rows(ar.start, na).into_owned();
                assert!(grad.amax() < 1e-9, "t={t} i={i}: gradient {grad}");
            }
        }
    }
}

#[test]
fn fixed_point_residual_within_tolerance() {
    for (spec, cfg) in games() {
        let sol = solve_equilibrium(&spec, &cfg).unwrap();
        assert!(sol.converged);
        assert!(sol.residual <= 10.0 * cfg.convergence_tol, "residual {}", sol.residual);
    }
}

#[test]
fn solver_variants_agree() {
    let spec = scalar(1.0, 2.0, 2);
    let base = solve_equilibrium(&spec, &run()).unwrap();
    for cfg in [
        RunConfig { damping: 0.4, ..run() },
        RunConfig { inner_fixed_point: true, ..run() },
        RunConfig { method: Method::BackwardNewton, ..run() },
        RunConfig { init_gain: 0.9, ..run() },
    ] {
        let other = solve_equilibrium(&spec, &cfg).unwrap();
        assert!(other.converged);
        assert!(profile_diff(&base.profile, &other.profile) < 1e-8, "{cfg:?}");
    }
}

#[test]
fn closed_form_values() {
    // Perfect observation: a = 2v/3, each player earns 4/9 per stage.
    let s = solve_equilibrium(&scalar(0.0, 0.0, 2), &run()).unwrap();
    assert!((s.game_value(&scalar(0.0, 0.0, 2)) - 8.0 / 9.0).abs() < 1e-10);
    // One stage with unit noise: L = 4/7 and the pair earns 16/49.
    let spec = scalar(1.0, 1.0, 1);
    let s = solve_equilibrium(&spec, &run()).unwrap();
    assert!((s.profile[0][0].l[(0, 0)] - 4.0 / 7.0).abs() < 1e-10);
    assert!((s.game_value(&spec) - 16.0 / 49.0).abs() < 1e-10);
}

#[test]
fn centralized_closed_forms() {
    // Both signals pooled: after t stages Var(V | data) = 1/(1+2t) and
    // the planner plays a = E[V | data], earning 1 - 1/(1+2t).
    for tt in 1..=10 {
        let c = solve_centralized(&scalar(1.0, 1.0, tt), 1e-10).unwrap();
        for (t, v) in c.stage_values.iter().enumerate() {
            let k = (t + 1) as f64;
            assert!((v - (1.0 - 1.0 / (1.0 + 2.0 * k))).abs() < 1e-12);
            assert!((&c.gains[t] - Mat::from_element(2, 1, 1.0)).amax() < 1e-12);
        }
    }
    let c = solve_centralized(&scalar(0.0, 0.0, 3), 1e-10).unwrap();
    assert!((c.value_per_time - 1.0).abs() < 1e-12);
}

#[test]
fn convex_actions_are_rejected() {
    let r1 = m(3, 3, &[0.0, 0.5, 0.0, 0.5, 1.0, 0.25, 0.0, 0.25, 0.0]);
    let r2 = m(3, 3, &[0.0, 0.0, 0.5, 0.0, 0.0, 0.25, 0.5, 0.25, -1.0]);
    let q = vec![m(1, 1, &[1.0]), m(1, 1, &[1.0])];
    let spec = LqgGameSpec::new(2, 1, m(1, 1, &[1.0]), q, vec![r1, r2]).unwrap();
    match solve_equilibrium(&spec, &run()) {
        Err(Error::SecondOrder { player, stage, .. }) => {
            assert_eq!(player, 1);
            assert_eq!(stage, 2);
        }
        other => panic!("expected a second-order failure, got {other:?}"),
    }
}

#[test]
fn iteration_budget_exhaustion_is_reported() {
    let spec = scalar(1.0, 1.0, 2);
    let s = solve_equilibrium(&spec, &RunConfig { max_outer_iters: 3, ..run() }).unwrap();
    assert!(!s.converged);
    assert_eq!(s.log.len(), 3);
}
