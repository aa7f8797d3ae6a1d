use crate::rollout::{replay_f, TrajectoryRecord};
use lqg_filter::Trajectory;
use pbe_core::{LqgGameSpec, Mat, Profile, Vector};
use serde::Serialize;

/// Largest standardized deviation found by each family of checks.
#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub num_trajectories: usize,
    /// Sample covariance of (V - v̂^i_t) with x^i_s, s <= t, in standard errors.
    pub orthogonality_max_z: f64,
    /// Sample variance of V - v̂^i_t against the diagonal of Σ^i_t.
    pub error_variance_max_z: f64,
    /// Regression of v̂^j_t - f^j_t on v̂^i_t: intercept against 0, slopes against E^j_t.
    pub linearity_max_z: f64,
    /// Largest |f online - f replayed from actions|.
    pub publicness_max_diff: f64,
    /// Variance, skewness and excess kurtosis of standardized v̂^j_t - E^j_t v - f^j_t.
    pub gaussianity_max_z: f64,
    pub threshold: f64,
    pub passed: bool,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// |mean| / standard error, with 0/0 read as 0.
fn z_of_mean(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    if se < 1e-300 {
        if m.abs() < 1e-9 { 0.0 } else { f64::INFINITY }
    } else {
        m.abs() / se
    }
}

/// z-scores of the sample variance, skewness and excess kurtosis of `xs`
/// against a standard normal.
fn normal_moment_z(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    let c = |k: i32| xs.iter().map(|x| (x - m).powi(k)).sum::<f64>() / n;
    let (m2, m3, m4) = (c(2), c(3), c(4));
    let var_z = (m2 - 1.0).abs() / (2.0 / n).sqrt();
    let skew_z = (m3 / m2.powf(1.5)).abs() / (6.0 / n).sqrt();
    let kurt_z = (m4 / (m2 * m2) - 3.0).abs() / (24.0 / n).sqrt();
    var_z.max(skew_z).max(kurt_z)
}

/// Ordinary least squares of y on [1, x]; returns (beta, standard errors).
fn ols(x: &[Vector], y: &[f64]) -> Option<(Vector, Vector)> {
    let p = x[0].len() + 1;
    let n = y.len();
    let mut xtx = Mat::zeros(p, p);
    let mut xty = Vector::zeros(p);
    let row = |k: usize| {
        let mut r = Vector::zeros(p);
        r[0] = 1.0;
        r.rows_mut(1, p - 1).copy_from(&x[k]);
        r
    };
    for k in 0..n {
        let r = row(k);
        xtx += &r * r.transpose();
        xty += &r * y[k];
    }
    let inv = xtx.try_inverse()?;
    let beta = &inv * xty;
    let rss: f64 = (0..n).map(|k| (y[k] - row(k).dot(&beta)).powi(2)).sum();
    let s2 = rss / (n - p) as f64;
    let se = Vector::from_fn(p, |r, _| (s2 * inv[(r, r)]).sqrt());
    Some((beta, se))
}

fn z(got: f64, want: f64, se: f64) -> f64 {
    let d = (got - want).abs();
    if se < 1e-12 {
        if d < 1e-8 { 0.0 } else { f64::INFINITY }
    } else {
        d / se
    }
}

/// Statistical checks that the online estimates behave like the conditional
/// means the offline recursion says they are.
pub fn filter_consistency_check(
    spec: &LqgGameSpec,
    profile: &Profile,
    forward: &Trajectory,
    records: &[TrajectoryRecord],
    threshold: f64,
) -> ConsistencyReport {
    let (n, nv, tt) = (spec.num_players, spec.state_dim, spec.horizon);
    let (mut orth, mut evar, mut lin, mut pubd, mut gauss) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for rec in records {
        for (a, b) in rec.f.iter().zip(replay_f(spec, profile, forward, rec)) {
            pubd = pubd.max((a - b).amax());
        }
    }
    for t in 0..tt {
        let stage = &forward.stages[t];
        for i in 0..n {
            let sig = stage.sigma_v(i, nv);
            for c in 0..nv {
                let err: Vec<f64> = records.iter().map(|r| r.v[c] - r.vhat[t][i][c]).collect();
                for s in 0..=t {
                    for d in 0..nv {
                        let prod: Vec<f64> = records.iter().zip(&err).map(|(r, e)| e * r.x[s][i][d]).collect();
                        orth = orth.max(z_of_mean(&prod));
                    }
                }
                let m = mean(&err);
                let nn = err.len() as f64;
                let sv = err.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (nn - 1.0);
                evar = evar.max(z(sv, sig[(c, c)], sig[(c, c)] * (2.0 / nn).sqrt()));
            }
            for j in (0..n).filter(|&j| j != i) {
                let xs: Vec<Vector> = records.iter().map(|r| r.vhat[t][i].clone()).collect();
                let ej = stage.e_block(j, nv);
                for c in 0..nv {
                    let ys: Vec<f64> = records.iter().map(|r| r.vhat[t][j][c] - r.f[t][j * nv + c]).collect();
                    if let Some((beta, se)) = ols(&xs, &ys) {
                        lin = lin.max(z(beta[0], 0.0, se[0]));
                        for d in 0..nv {
                            lin = lin.max(z(beta[d + 1], ej[(c, d)], se[d + 1]));
                        }
                    }
                }
            }
        }
        for j in 0..n {
            let cov = stage.sigma_tilde_block(j, nv);
            let ej = stage.e_block(j, nv);
            for c in 0..nv {
                let res: Vec<f64> = records
                    .iter()
                    .map(|r| r.vhat[t][j][c] - (&ej * &r.v)[c] - r.f[t][j * nv + c])
                    .collect();
                let sd = cov[(c, c)].max(0.0).sqrt();
                if sd < 1e-9 {
                    let worst = res.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
                    if worst > 1e-8 {
                        gauss = f64::INFINITY;
                    }
                } else {
                    let std: Vec<f64> = res.iter().map(|x| x / sd).collect();
                    gauss = gauss.max(normal_moment_z(&std));
                }
            }
        }
    }
    let passed = orth <= threshold && evar <= threshold && lin <= threshold && gauss <= threshold && pubd <= 1e-10;
    ConsistencyReport {
        num_trajectories: records.len(),
        orthogonality_max_z: orth,
        error_variance_max_z: evar,
        linearity_max_z: lin,
        publicness_max_diff: pubd,
        gaussianity_max_z: gauss,
        threshold,
        passed,
    }
}
