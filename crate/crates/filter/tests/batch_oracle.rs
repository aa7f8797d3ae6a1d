//! The recursive filters against brute-force Gaussian conditioning.
//!
//! Every quantity in a play of the game is affine in the primitive vector
//! z = [v; w^1_1; ...; w^N_T]. We recover those affine maps by running the
//! recursions on basis vectors, then condition the joint Gaussian directly.

use lqg_filter::{
    estimate_of_estimates, forward_pass, init_private, private_step, update_f, Trajectory,
};
use pbe_core::linalg::{block_diag, max_abs, pinv_sym};
use pbe_core::{LinearStageStrategy, LqgGameSpec, Mat, Profile, Vector};
use proptest::prelude::*;

struct Play {
    vhat: Vec<Vec<Vector>>,
    f: Vec<Vector>,
    x: Vec<Vec<Vector>>,
    a: Vec<Vec<Vector>>,
}

fn play(spec: &LqgGameSpec, p: &Profile, tr: &Trajectory, z: &Vector) -> Play {
    let (n, nv, tt) = (spec.num_players, spec.state_dim, spec.horizon);
    let v = z.rows(0, nv).into_owned();
    let w = |t: usize, i: usize| z.rows(nv + (t * n + i) * nv, nv).into_owned();
    let mut out = Play { vhat: vec![], f: vec![], x: vec![], a: vec![] };
    let mut f = Vector::zeros(n * nv);
    let mut st: Vec<_> = (0..n).map(|i| init_private(&tr.basis_gain[i], &(&v + w(0, i)))).collect();
    for t in 0..tt {
        let x: Vec<Vector> = (0..n).map(|i| &v + w(t, i)).collect();
        if t > 0 {
            let g = &tr.gains[t - 1];
            let l: Vec<Mat> = p[t - 1].iter().map(|s| s.l.clone()).collect();
            let fp = &out.f[t - 1];
            let ap = &out.a[t - 1];
            let mp: Vec<Vector> = p[t - 1].iter().map(|s| s.offset(fp)).collect();
            st = (0..n).map(|i| private_step(spec, g, i, &st[i], &l, fp, ap, &mp, &x[i])).collect();
            f = update_f(spec, g, &l, fp, ap, &mp);
        }
        let a: Vec<Vector> = (0..n).map(|i| p[t][i].action(&st[i].vhat, &f)).collect();
        out.vhat.push(st.iter().map(|s| s.vhat.clone()).collect());
        out.f.push(f.clone());
        out.x.push(x);
        out.a.push(a);
    }
    out
}

/// Affine map z -> g(play(z)) as (matrix, constant).
fn affine(
    spec: &LqgGameSpec,
    p: &Profile,
    tr: &Trajectory,
    dz: usize,
    g: impl Fn(&Play) -> Vector,
) -> (Mat, Vector) {
    let c = g(&play(spec, p, tr, &Vector::zeros(dz)));
    let mut m = Mat::zeros(c.len(), dz);
    for k in 0..dz {
        let mut e = Vector::zeros(dz);
        e[k] = 1.0;
        let col = g(&play(spec, p, tr, &e)) - &c;
        m.set_column(k, &col);
    }
    (m, c)
}

fn cat(vs: &[Vector]) -> Vector {
    let n: usize = vs.iter().map(|v| v.len()).sum();
    let mut out = Vector::zeros(n);
    let mut r = 0;
    for v in vs {
        out.rows_mut(r, v.len()).copy_from(v);
        r += v.len();
    }
    out
}

/// Conditional mean and covariance of `tz + tc` given `oz + oc = o`.
fn condition(
    cov: &Mat,
    (tz, tc): &(Mat, Vector),
    (oz, oc): &(Mat, Vector),
    o: &Vector,
) -> (Vector, Mat) {
    let soo = oz * cov * oz.transpose();
    let sto = tz * cov * oz.transpose();
    let k = &sto * pinv_sym(&soo, 1e-12);
    let mean = tc + &k * (o - oc);
    let c = tz * cov * tz.transpose() - &k * sto.transpose();
    (mean, c)
}

struct Case {
    spec: LqgGameSpec,
    profile: Profile,
    z: Vector,
}

fn primitive_cov(spec: &LqgGameSpec) -> Mat {
    let mut blocks = vec![spec.prior_cov.clone()];
    for _ in 0..spec.horizon {
        blocks.extend(spec.obs_noise_cov.iter().cloned());
    }
    block_diag(&blocks)
}

fn check(case: &Case) {
    let spec = &case.spec;
    let p = &case.profile;
    let (n, nv, tt) = (spec.num_players, spec.state_dim, spec.horizon);
    let tr = forward_pass(spec, p, 1e-12).unwrap();
    let cov = primitive_cov(spec);
    let dz = cov.nrows();
    let real = play(spec, p, &tr, &case.z);
    for t in 0..tt {
        let stage = &tr.stages[t];
        for i in 0..n {
            let info = |pl: &Play| {
                let mut parts = vec![];
                for s in 0..=t {
                    parts.push(pl.x[s][i].clone());
                }
                for s in 0..t {
                    for j in (0..n).filter(|&j| j != i) {
                        parts.push(pl.a[s][j].clone());
                    }
                }
                cat(&parts)
            };
            let om = affine(spec, p, &tr, dz, info);
            let o = info(&real);
            let mut vz = Mat::zeros(nv, dz);
            vz.view_mut((0, 0), (nv, nv)).copy_from(&Mat::identity(nv, nv));
            let (mv, cv) = condition(&cov, &(vz, Vector::zeros(nv)), &om, &o);
            let got = &real.vhat[t][i];
            assert!((got - &mv).amax() < 1e-8, "t={t} i={i}: vhat {got} vs {mv}");
            assert!(max_abs(&(stage.sigma_v(i, nv) - &cv)) < 1e-8, "t={t} i={i}: posterior covariance");

            let others_m = affine(spec, p, &tr, dz, |pl| {
                cat(&(0..n).filter(|&j| j != i).map(|j| pl.vhat[t][j].clone()).collect::<Vec<_>>())
            });
            let (mo, co) = condition(&cov, &others_m, &om, &o);
            let eoe = estimate_of_estimates(stage, i, got, &real.f[t], nv);
            assert!((&eoe - &mo).amax() < 1e-8, "t={t} i={i}: estimate of estimates");
            assert!(max_abs(&(stage.sigma_others(i, nv) - &co)) < 1e-8, "t={t} i={i}: others covariance");
        }

        let public = |pl: &Play| {
            let mut parts = vec![];
            for s in 0..t {
                for j in 0..n {
                    parts.push(pl.a[s][j].clone());
                }
            }
            cat(&parts)
        };
        let pm = affine(spec, p, &tr, dz, public);
        // condition on v as well as the public actions
        let mut vz = Mat::zeros(nv, dz);
        vz.view_mut((0, 0), (nv, nv)).copy_from(&Mat::identity(nv, nv));
        let oz = vstack2(&vz, &pm.0);
        let oc = cat(&[Vector::zeros(nv), pm.1.clone()]);
        let o = cat(&[case.z.rows(0, nv).into_owned(), public(&real)]);
        let all = affine(spec, p, &tr, dz, |pl| cat(&pl.vhat[t]));
        let (m, c) = condition(&cov, &all, &(oz, oc), &o);
        let want = &stage.e * case.z.rows(0, nv) + &real.f[t];
        assert!((&want - &m).amax() < 1e-8, "t={t}: public mean");
        let d = (n + 1) * nv;
        let st = stage.sigma_tilde_pred.view((nv, nv), (d - nv, d - nv)).into_owned();
        assert!(max_abs(&(st - c)) < 1e-8, "t={t}: public covariance");
    }
}

fn vstack2(a: &Mat, b: &Mat) -> Mat {
    pbe_core::linalg::vstack(&[a.clone(), b.clone()])
}

fn strat(vals: &[f64], na: usize, nv: usize, n: usize) -> LinearStageStrategy {
    let mut s = LinearStageStrategy::zeros(na, nv, n);
    let mut it = vals.iter().cycle();
    for x in s.l.iter_mut() {
        *x = *it.next().unwrap();
    }
    for x in s.m.iter_mut() {
        *x = *it.next().unwrap() * 0.5;
    }
    for x in s.m_bar.iter_mut() {
        *x = *it.next().unwrap();
    }
    s
}

fn make_case(n: usize, nv: usize, na: usize, tt: usize, vals: &[f64], zs: &[f64]) -> Case {
    let mut prior = Mat::from_fn(nv, nv, |r, c| if r == c { 1.5 } else { 0.3 });
    prior[(0, 0)] += 0.2;
    let q: Vec<Mat> = (0..n)
        .map(|i| Mat::from_fn(nv, nv, |r, c| if r == c { 0.5 + 0.4 * i as f64 } else { 0.1 }))
        .collect();
    let dr = nv + n * na;
    let spec = LqgGameSpec::new(tt, na, prior, q, vec![Mat::zeros(dr, dr); n]).unwrap();
    let mut k = 0;
    let profile: Profile = (0..tt)
        .map(|_| {
            (0..n)
                .map(|_| {
                    k += 7;
                    let rot: Vec<f64> = vals.iter().cycle().skip(k % vals.len()).take(vals.len()).cloned().collect();
                    strat(&rot, na, nv, n)
                })
                .collect()
        })
        .collect();
    let dz = nv + tt * n * nv;
    let z = Vector::from_iterator(dz, zs.iter().cycle().cloned().take(dz));
    Case { spec, profile, z }
}

#[test]
fn scalar_two_players_matches_batch_conditioning() {
    let vals = [0.8, -0.3, 1.2, 0.4, 0.1, -0.7, 0.9];
    let zs = [0.3, -1.1, 0.7, 2.0, -0.4, 0.05, 1.3];
    check(&make_case(2, 1, 1, 4, &vals, &zs));
}

#[test]
fn two_dim_two_players_matches_batch_conditioning() {
    let vals = [0.8, -0.3, 1.2, 0.4, 0.1, -0.7, 0.9, 0.35, -0.15];
    let zs = [0.3, -1.1, 0.7, 2.0, -0.4, 0.05, 1.3];
    check(&make_case(2, 2, 1, 3, &vals, &zs));
}

#[test]
fn three_players_matches_batch_conditioning() {
    let vals = [0.6, -0.2, 1.1, 0.45, -0.5, 0.25];
    let zs = [-0.6, 0.9, 0.2, -1.4, 0.5];
    check(&make_case(3, 1, 1, 3, &vals, &zs));
}

#[test]
fn vector_actions_match_batch_conditioning() {
    let vals = [0.6, -0.2, 1.1, 0.45, -0.5, 0.25, 0.7];
    let zs = [-0.6, 0.9, 0.2, -1.4, 0.5];
    check(&make_case(2, 2, 2, 3, &vals, &zs));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn random_scalar_profiles(vals in prop::collection::vec(-2.0f64..2.0, 7), zs in prop::collection::vec(-2.0f64..2.0, 9)) {
        check(&make_case(2, 1, 1, 3, &vals, &zs));
    }
}
