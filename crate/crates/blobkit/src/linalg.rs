//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;
pub type Vec64 = DVector<f64>;

pub const COND_LIMIT: f64 = 1e12;

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn cmax_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

pub fn is_symmetric(m: &Mat, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.transpose())) <= tol * (1.0 + max_abs(m))
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn sym_fn(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let eig = symmetrize(m).symmetric_eigen();
    let d = eig.eigenvalues.map(f);
    &eig.eigenvectors * Mat::from_diagonal(&d) * eig.eigenvectors.transpose()
}

fn checked_spd(m: &Mat, what: &str) -> Result<(Mat, Vec64)> {
    if !is_symmetric(m, 1e-9) {
        return Err(Error::InvalidInput(format!("{what}: matrix is not symmetric")));
    }
    let eig = symmetrize(m).symmetric_eigen();
    let lo = eig.eigenvalues.min();
    let hi = eig.eigenvalues.max();
    if lo <= 0.0 {
        return Err(Error::InvalidInput(format!("{what}: matrix is not positive definite")));
    }
    if hi / lo > COND_LIMIT {
        return Err(Error::NumericalDegeneracy(format!(
            "{what}: condition number {:.3e} exceeds {COND_LIMIT:e}",
            hi / lo
        )));
    }
    Ok((eig.eigenvectors, eig.eigenvalues))
}

pub fn spd_pow(m: &Mat, power: f64, what: &str) -> Result<Mat> {
    let (v, d) = checked_spd(m, what)?;
    let d = d.map(|x| x.powf(power));
    Ok(&v * Mat::from_diagonal(&d) * v.transpose())
}

pub fn spd_sqrt(m: &Mat) -> Result<Mat> {
    spd_pow(m, 0.5, "sqrt")
}

pub fn spd_inv_sqrt(m: &Mat) -> Result<Mat> {
    spd_pow(m, -0.5, "inverse sqrt")
}

pub fn is_positive_definite(m: &Mat) -> bool {
    is_symmetric(m, 1e-9) && symmetrize(m).cholesky().is_some()
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn herm_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
pub fn herm_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

pub fn block(m: &Mat, r: usize, c: usize, n: usize) -> Mat {
    m.view((r * n, c * n), (n, n)).into_owned()
}

pub fn from_blocks(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Mat {
    let n = a.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}
