use crate::{check_psd, INNOV_TOL};
use pbe_core::blocks::{get, others, set};
use pbe_core::linalg::{block_diag, max_abs, min_eig, pinv_sym, symmetrize};
use pbe_core::{Error, LqgGameSpec, Mat, Profile, Result, Vector};

/// Action-independent public quantities at one stage.
#[derive(Clone, Debug, PartialEq)]
pub struct PublicStage {
    /// Σ^i_{t+1|t} per player, over `[v; v̂^{-i}_t]`.
    pub sigma_pred: Vec<Mat>,
    /// Σ^i_{t|t} per player, over `[v; v̂^{-i}_{t-1}]`.
    pub sigma_filt: Vec<Mat>,
    /// Σ̃_{t+1|t} over `[v; v̂_t]`.
    pub sigma_tilde_pred: Mat,
    /// Σ̃_{t|t} over `[v; v̂_{t-1}]`.
    pub sigma_tilde_filt: Mat,
    /// E_t, the stack of E^j_t (N N_v x N_v).
    pub e: Mat,
}

impl PublicStage {
    /// Σ^i_t, the V block of Σ^i_{t+1|t}: player i's posterior covariance of V.
    pub fn sigma_v(&self, i: usize, nv: usize) -> Mat {
        get(&self.sigma_pred[i], 0..nv, 0..nv)
    }

    /// Covariance of v̂^{-i}_t given player i's information.
    pub fn sigma_others(&self, i: usize, nv: usize) -> Mat {
        let d = self.sigma_pred[i].nrows();
        get(&self.sigma_pred[i], nv..d, nv..d)
    }

    pub fn e_block(&self, j: usize, nv: usize) -> Mat {
        get(&self.e, j * nv..(j + 1) * nv, 0..nv)
    }

    /// E^{-i}_t stacked over the other players in ascending order.
    pub fn e_others(&self, i: usize, nv: usize) -> Mat {
        let n = self.e.nrows() / nv;
        stack_rows(&others(n, i).iter().map(|&j| self.e_block(j, nv)).collect::<Vec<_>>(), nv)
    }

    /// Covariance of v̂^j_t around E^j_t v + f^j_t (the v̂^j block of Σ̃_{t+1|t}).
    pub fn sigma_tilde_block(&self, j: usize, nv: usize) -> Mat {
        let r = nv + j * nv..nv + (j + 1) * nv;
        get(&self.sigma_tilde_pred, r.clone(), r)
    }
}

/// Gains of the step from stage t to t+1 (computed with L_t).
#[derive(Clone, Debug, PartialEq)]
pub struct StageGains {
    /// C^i_{t+1} per player.
    pub c: Vec<Mat>,
    /// Full private gain J^i_{t+1}.
    pub j: Vec<Mat>,
    /// (J^i)_{v̂^i, x^i}
    pub jx: Vec<Mat>,
    /// (J^i)_{v̂^i, a^{-i}}; columns follow the other players in ascending order.
    pub ja: Vec<Mat>,
    /// (G^j)_{:, v}
    pub gv: Vec<Mat>,
    /// (G^j)_{:, v̂^j}
    pub gvh: Vec<Mat>,
    pub c_tilde: Mat,
    pub j_tilde: Mat,
    pub a_tilde: Mat,
    /// (Ã J̃)_{v̂, a}, N N_v x N N_a.
    pub aj_va: Mat,
    /// (G̃)_{:, v} stacked.
    pub gt_v: Mat,
    /// (G̃)_{:, v̂}, block diagonal.
    pub gt_vh: Mat,
}

impl StageGains {
    /// (J^k)_{v̂^k, a^j} for j != k.
    pub fn ja_block(&self, k: usize, j: usize, na: usize) -> Mat {
        let n = self.ja.len();
        let r = others(n, k).iter().position(|&x| x == j).expect("j must differ from k");
        get(&self.ja[k], 0..self.ja[k].nrows(), r * na..(r + 1) * na)
    }

    /// (Ã J̃)_{v̂^k, a^j}
    pub fn aj_block(&self, k: usize, j: usize, nv: usize, na: usize) -> Mat {
        get(&self.aj_va, k * nv..(k + 1) * nv, j * na..(j + 1) * na)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Σ(Σ + Q^i)^+ per player: the stage-1 estimate gain and E^i_1.
    pub basis_gain: Vec<Mat>,
    pub stages: Vec<PublicStage>,
    /// `gains[t]` advances stage t to t + 1; length T - 1.
    pub gains: Vec<StageGains>,
}

pub(crate) fn stack_rows(blocks: &[Mat], ncols: usize) -> Mat {
    if blocks.is_empty() {
        return Mat::zeros(0, ncols);
    }
    pbe_core::linalg::vstack(blocks)
}

fn others_diag(l: &[Mat], i: usize) -> Mat {
    block_diag(&others(l.len(), i).iter().map(|&j| l[j].clone()).collect::<Vec<_>>())
}

/// Transition of player i's private state `[v; v̂^{-i}]` and its noise input.
pub(crate) fn private_transition(
    spec: &LqgGameSpec,
    i: usize,
    gv: &[Mat],
    gvh: &[Mat],
    jx: &[Mat],
) -> (Mat, Mat, Mat) {
    let (n, nv) = (spec.num_players, spec.state_dim);
    let oth = others(n, i);
    let d = n * nv;
    let mut a = Mat::zeros(d, d);
    set(&mut a, 0..nv, 0..nv, &Mat::identity(nv, nv));
    let mut h = Mat::zeros(d, (n - 1) * nv);
    for (r, &j) in oth.iter().enumerate() {
        let rows = nv + r * nv..nv + (r + 1) * nv;
        set(&mut a, rows.clone(), 0..nv, &gv[j]);
        set(&mut a, rows.clone(), rows.clone(), &gvh[j]);
        set(&mut h, rows, r * nv..(r + 1) * nv, &jx[j]);
    }
    let q = block_diag(&oth.iter().map(|&j| spec.obs_noise_cov[j].clone()).collect::<Vec<_>>());
    (a, h, q)
}

fn public_transition(spec: &LqgGameSpec, gv: &[Mat], gvh: &[Mat], jx: &[Mat]) -> (Mat, Mat, Mat, Mat) {
    let (n, nv) = (spec.num_players, spec.state_dim);
    let d = (n + 1) * nv;
    let gt_v = stack_rows(gv, nv);
    let gt_vh = block_diag(gvh);
    let mut a = Mat::zeros(d, d);
    set(&mut a, 0..nv, 0..nv, &Mat::identity(nv, nv));
    set(&mut a, nv..d, 0..nv, &gt_v);
    set(&mut a, nv..d, nv..d, &gt_vh);
    let mut h = Mat::zeros(d, n * nv);
    set(&mut h, nv..d, 0..n * nv, &block_diag(jx));
    (a, h, gt_v, gt_vh)
}

fn predict(a: &Mat, sf: &Mat, h: &Mat, q: &Mat) -> Mat {
    symmetrize(&(a * sf * a.transpose() + h * q * h.transpose()))
}

/// Stage-1 public quantities.
pub fn init_public(spec: &LqgGameSpec, pinv_tol: f64) -> Result<(Vec<Mat>, PublicStage)> {
    let (n, nv) = (spec.num_players, spec.state_dim);
    let sig = &spec.prior_cov;
    let mut k = Vec::with_capacity(n);
    for i in 0..n {
        let s = sig + &spec.obs_noise_cov[i];
        if max_abs(&s) == 0.0 {
            return Err(Error::Numerical(format!("degenerate prior: Σ + Q^{} is zero", i + 1)));
        }
        k.push(sig * pinv_sym(&s, pinv_tol));
    }
    let zeros_v = vec![Mat::zeros(nv, nv); n];
    let (mut sigma_filt, mut sigma_pred) = (Vec::new(), Vec::new());
    for i in 0..n {
        let post = symmetrize(&(sig - &k[i] * sig));
        check_psd(&post, "stage-1 posterior covariance")?;
        let sf = block_diag(&[post, Mat::zeros((n - 1) * nv, (n - 1) * nv)]);
        let (a, h, q) = private_transition(spec, i, &k, &zeros_v, &k);
        sigma_pred.push(predict(&a, &sf, &h, &q));
        sigma_filt.push(sf);
    }
    let st_f = Mat::zeros((n + 1) * nv, (n + 1) * nv);
    let (at, ht, _, _) = public_transition(spec, &k, &zeros_v, &k);
    let qall = block_diag(&spec.obs_noise_cov);
    let st_p = predict(&at, &st_f, &ht, &qall);
    let e = stack_rows(&k, nv);
    Ok((k, PublicStage { sigma_pred, sigma_filt, sigma_tilde_pred: st_p, sigma_tilde_filt: st_f, e }))
}

/// Advances the public recursion one stage under L_t (`l[j]` = L^j_t).
pub fn public_step(
    spec: &LqgGameSpec,
    prev: &PublicStage,
    l: &[Mat],
    pinv_tol: f64,
) -> Result<(StageGains, PublicStage)> {
    let (n, nv, na) = (spec.num_players, spec.state_dim, spec.action_dim);
    let no = n - 1;
    let (mut cs, mut js, mut jx, mut ja, mut sfilt) = (vec![], vec![], vec![], vec![], vec![]);
    for i in 0..n {
        let sp = &prev.sigma_pred[i];
        let mut c = Mat::zeros(no * na + nv, n * nv);
        set(&mut c, 0..no * na, nv..n * nv, &others_diag(l, i));
        set(&mut c, no * na..no * na + nv, 0..nv, &Mat::identity(nv, nv));
        let mut r = Mat::zeros(no * na + nv, no * na + nv);
        set(&mut r, no * na..no * na + nv, no * na..no * na + nv, &spec.obs_noise_cov[i]);
        let s = symmetrize(&(&c * sp * c.transpose() + &r));
        if s.nrows() > 0 && min_eig(&s) < -INNOV_TOL * (1.0 + max_abs(&s)) {
            return Err(Error::Numerical(format!(
                "innovation covariance of player {} not positive semidefinite",
                i + 1
            )));
        }
        let j = sp * c.transpose() * pinv_sym(&s, pinv_tol);
        let sf = symmetrize(&((Mat::identity(n * nv, n * nv) - &j * &c) * sp));
        check_psd(&sf, "private filtered covariance")?;
        jx.push(get(&j, 0..nv, no * na..no * na + nv));
        ja.push(get(&j, 0..nv, 0..no * na));
        cs.push(c);
        js.push(j);
        sfilt.push(sf);
    }
    let mut gv = Vec::with_capacity(n);
    let mut gvh = Vec::with_capacity(n);
    for j in 0..n {
        let e_oth = prev.e_others(j, nv);
        gv.push(jx[j].clone());
        gvh.push(Mat::identity(nv, nv) - &ja[j] * others_diag(l, j) * e_oth - &jx[j]);
    }
    let mut spred = Vec::with_capacity(n);
    for i in 0..n {
        let (a, h, q) = private_transition(spec, i, &gv, &gvh, &jx);
        let p = predict(&a, &sfilt[i], &h, &q);
        check_psd(&p, "private predicted covariance")?;
        spred.push(p);
    }

    let d = (n + 1) * nv;
    let ct = block_diag(&[Mat::identity(nv, nv), block_diag(l)]);
    let st = &prev.sigma_tilde_pred;
    let sy = symmetrize(&(&ct * st * ct.transpose()));
    let jt = st * ct.transpose() * pinv_sym(&sy, pinv_tol);
    let st_f = symmetrize(&((Mat::identity(d, d) - &jt * &ct) * st));
    check_psd(&st_f, "public filtered covariance")?;
    let (at, ht, gt_v, gt_vh) = public_transition(spec, &gv, &gvh, &jx);
    let st_p = predict(&at, &st_f, &ht, &block_diag(&spec.obs_noise_cov));
    check_psd(&st_p, "public predicted covariance")?;
    let aj = &at * &jt;
    let aj_va = get(&aj, nv..d, nv..nv + n * na);
    let e = &gt_v + (&gt_vh - &aj_va * block_diag(l)) * &prev.e;

    let gains = StageGains {
        c: cs,
        j: js,
        jx,
        ja,
        gv,
        gvh,
        c_tilde: ct,
        j_tilde: jt,
        a_tilde: at,
        aj_va,
        gt_v,
        gt_vh,
    };
    let next = PublicStage { sigma_pred: spred, sigma_filt: sfilt, sigma_tilde_pred: st_p, sigma_tilde_filt: st_f, e };
    Ok((gains, next))
}

/// Offline forward pass over all stages.
pub fn forward_pass(spec: &LqgGameSpec, profile: &Profile, pinv_tol: f64) -> Result<Trajectory> {
    forward_prefix(spec, profile, spec.horizon, pinv_tol)
}

/// Forward pass that stops after `stages` stages (gains for the last stop
/// at index `stages - 2`).
pub fn forward_prefix(spec: &LqgGameSpec, profile: &Profile, stages: usize, pinv_tol: f64) -> Result<Trajectory> {
    let (k, first) = init_public(spec, pinv_tol)?;
    let mut stages_out = vec![first];
    let mut gains = Vec::new();
    for t in 0..stages.min(spec.horizon).saturating_sub(1) {
        let l: Vec<Mat> = profile[t].iter().map(|s| s.l.clone()).collect();
        let (g, next) = public_step(spec, &stages_out[t], &l, pinv_tol)?;
        gains.push(g);
        stages_out.push(next);
    }
    Ok(Trajectory { basis_gain: k, stages: stages_out, gains })
}

/// f_{t+1} from f_t and realized actions: `a[j]` and offsets `m[j] = M^j f + m̄^j`.
pub fn update_f(
    spec: &LqgGameSpec,
    gains: &StageGains,
    l: &[Mat],
    f: &Vector,
    a: &[Vector],
    m: &[Vector],
) -> Vector {
    let (n, nv, na) = (spec.num_players, spec.state_dim, spec.action_dim);
    let mut innov = Vector::zeros(n * na);
    for j in 0..n {
        innov.rows_mut(j * na, na).copy_from(&(&a[j] - &m[j]));
    }
    let ld = block_diag(l);
    let mut out = (&gains.gt_vh - &gains.aj_va * &ld) * f + &gains.aj_va * &innov;
    for i in 0..n {
        let oth = others(n, i);
        let mut y = Vector::zeros(oth.len() * na);
        for (r, &j) in oth.iter().enumerate() {
            let v = &a[j] - &m[j] - &l[j] * f.rows(j * nv, nv);
            y.rows_mut(r * na, na).copy_from(&v);
        }
        let d = &gains.ja[i] * y;
        let mut blk = out.rows_mut(i * nv, nv);
        blk += d;
    }
    out
}

/// Joseph form of the filtered covariance, `(I - JC) P (I - JC)' + J R J'`.
pub fn joseph_filtered(p: &Mat, c: &Mat, j: &Mat, r: &Mat) -> Mat {
    let d = p.nrows();
    let ikc = Mat::identity(d, d) - j * c;
    symmetrize(&(&ikc * p * ikc.transpose() + j * r * j.transpose()))
}
