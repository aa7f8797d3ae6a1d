//! Small dense helpers on top of nalgebra.

use crate::{Mat, Vector};
use nalgebra::SymmetricEigen;

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Moore-Penrose inverse of the symmetric part of `m`.
///
/// Eigenvalues with magnitude at or below `tol` times the largest magnitude
/// are treated as zero.
pub fn pinv_sym(m: &Mat, tol: f64) -> Mat {
    let n = m.nrows();
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let top = eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    if top == 0.0 {
        return Mat::zeros(n, n);
    }
    let cut = tol * top;
    let mut out = Mat::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() > cut {
            let u = eig.eigenvectors.column(k);
            out += (u * u.transpose()) / lam;
        }
    }
    symmetrize(&out)
}

pub fn eigenvalues_sym(m: &Mat) -> Vector {
    if m.nrows() == 0 {
        return Vector::zeros(0);
    }
    SymmetricEigen::new(symmetrize(m)).eigenvalues
}

pub fn min_eig(m: &Mat) -> f64 {
    eigenvalues_sym(m).iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn max_eig(m: &Mat) -> f64 {
    eigenvalues_sym(m).iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Symmetric square root for a PSD matrix; negative eigenvalues are clipped.
pub fn sqrt_psd(m: &Mat) -> Mat {
    let n = m.nrows();
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut out = Mat::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > 0.0 {
            let u = eig.eigenvectors.column(k);
            out += (u * u.transpose()) * lam.sqrt();
        }
    }
    out
}

/// A factor `F` with `F F' = m`. Cholesky when it succeeds, otherwise the
/// eigenvalue square root (covers singular PSD inputs like Q = 0).
pub fn psd_factor(m: &Mat) -> Mat {
    match nalgebra::Cholesky::new(symmetrize(m)) {
        Some(c) => c.l(),
        None => sqrt_psd(m),
    }
}

pub fn block_diag(blocks: &[Mat]) -> Mat {
    let r: usize = blocks.iter().map(|b| b.nrows()).sum();
    let c: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(r, c);
    let (mut i, mut j) = (0, 0);
    for b in blocks {
        out.view_mut((i, j), (b.nrows(), b.ncols())).copy_from(b);
        i += b.nrows();
        j += b.ncols();
    }
    out
}

pub fn vstack(blocks: &[Mat]) -> Mat {
    let c = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let r: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(r, c);
    let mut i = 0;
    for b in blocks {
        assert_eq!(b.ncols(), c, "vstack column mismatch");
        out.view_mut((i, 0), (b.nrows(), c)).copy_from(b);
        i += b.nrows();
    }
    out
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |a, &b| a.max(b.abs()))
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

pub fn is_finite(m: &Mat) -> bool {
    m.iter().all(|x| x.is_finite())
}

pub fn from_rows(rows: &[Vec<f64>]) -> Mat {
    let r = rows.len();
    let c = rows.first().map(|x| x.len()).unwrap_or(0);
    Mat::from_fn(r, c, |i, j| rows[i][j])
}

pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Row-major flattening, the order used in every output file.
pub fn row_major(m: &Mat) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn quad(m: &Mat, x: &Vector) -> f64 {
    (x.transpose() * m * x)[(0, 0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_of_singular_diag() {
        let m = Mat::from_diagonal(&Vector::from_vec(vec![2.0, 0.0]));
        let p = pinv_sym(&m, 1e-10);
        assert!((p[(0, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(p[(1, 1)], 0.0);
    }

    #[test]
    fn pinv_of_zero() {
        assert_eq!(pinv_sym(&Mat::zeros(3, 3), 1e-10), Mat::zeros(3, 3));
    }

    #[test]
    fn factor_handles_singular() {
        let m = from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let f = psd_factor(&m);
        assert!(max_abs_diff(&(&f * f.transpose()), &m) < 1e-12);
    }

    #[test]
    fn block_diag_shapes() {
        let b = block_diag(&[Mat::identity(1, 1), Mat::from_element(2, 3, 1.0)]);
        assert_eq!(b.shape(), (3, 4));
        assert_eq!(b[(1, 1)], 1.0);
        assert_eq!(b[(0, 1)], 0.0);
    }
}
