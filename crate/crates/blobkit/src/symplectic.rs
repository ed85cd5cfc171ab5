//! Symplectic linear algebra with the convention J = [[0, I], [-I, 0]].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    block, from_blocks, is_positive_definite, is_symmetric, max_abs, spd_inv_sqrt, symmetrize,
    Mat, Vec64,
};

pub const TOL_SYM: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct StandardForm {
    pub n: usize,
    pub j: Mat,
}

pub fn standard_j(n: usize) -> Result<StandardForm> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    Ok(StandardForm { n, j: j_matrix(n) })
}

pub(crate) fn j_matrix(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = 1.0;
        j[(n + k, k)] = -1.0;
    }
    j
}

/// σ(z, z') = (Jz)·z' = p·x' − x·p'.
pub fn sigma(z: &[f64], zp: &[f64]) -> f64 {
    assert_eq!(z.len(), zp.len());
    assert!(z.len() % 2 == 0);
    let n = z.len() / 2;
    (0..n).map(|k| z[n + k] * zp[k] - z[k] * zp[n + k]).sum()
}

fn half_dim(s: &Mat) -> Result<usize> {
    if !s.is_square() || s.nrows() % 2 != 0 || s.nrows() == 0 {
        return Err(Error::InvalidDimension(format!(
            "expected a nonempty square matrix of even size, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    Ok(s.nrows() / 2)
}

pub fn symplectic_residual(s: &Mat) -> Result<f64> {
    let n = half_dim(s)?;
    let j = j_matrix(n);
    Ok(max_abs(&(s * &j * s.transpose() - j)))
}

pub fn is_symplectic(s: &Mat, tol: f64) -> Result<bool> {
    Ok(symplectic_residual(s)? <= tol)
}

/// Block form of SᵀJS = J: AᵀC and BᵀD symmetric, AᵀD − CᵀB = I.
pub fn block_conditions_hold(s: &Mat, tol: f64) -> Result<bool> {
    let n = half_dim(s)?;
    let (a, b, c, d) = (block(s, 0, 0, n), block(s, 0, 1, n), block(s, 1, 0, n), block(s, 1, 1, n));
    let atc = a.transpose() * &c;
    let btd = b.transpose() * &d;
    let unit = a.transpose() * &d - c.transpose() * &b - Mat::identity(n, n);
    let first = max_abs(&(&atc - atc.transpose())) <= tol
        && max_abs(&(&btd - btd.transpose())) <= tol
        && max_abs(&unit) <= tol;
    // transposed form SJSᵀ = J: ABᵀ and CDᵀ symmetric, ADᵀ − BCᵀ = I
    let abt = &a * b.transpose();
    let cdt = &c * d.transpose();
    let unit2 = &a * d.transpose() - &b * c.transpose() - Mat::identity(n, n);
    let second = max_abs(&(&abt - abt.transpose())) <= tol
        && max_abs(&(&cdt - cdt.transpose())) <= tol
        && max_abs(&unit2) <= tol;
    Ok(first && second)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymplecticRecord", into = "SymplecticRecord")]
pub struct SymplecticMatrix {
    n: usize,
    s: Mat,
}

impl SymplecticMatrix {
    pub fn new(s: Mat) -> Result<Self> {
        Self::with_tol(s, TOL_SYM)
    }

    pub fn with_tol(s: Mat, tol: f64) -> Result<Self> {
        let n = half_dim(&s)?;
        let res = symplectic_residual(&s)?;
        if res > tol * (1.0 + max_abs(&s)).powi(2) {
            return Err(Error::InvalidInput(format!(
                "matrix is not symplectic (residual {res:.3e})"
            )));
        }
        Ok(Self { n, s })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, s: Mat::identity(2 * n, 2 * n) }
    }

    pub fn j(n: usize) -> Self {
        Self { n, s: j_matrix(n) }
    }

    /// V_P = [[I, 0], [−P, I]].
    pub fn shear(p: &Mat) -> Result<Self> {
        if !is_symmetric(p, 1e-12) {
            return Err(Error::InvalidInput("V_P needs a symmetric P".into()));
        }
        let n = p.nrows();
        let i = Mat::identity(n, n);
        Ok(Self { n, s: from_blocks(&i, &Mat::zeros(n, n), &(-p), &i) })
    }

    /// M_L = diag(L⁻¹, Lᵀ) for invertible L.
    pub fn dilation(l: &Mat) -> Result<Self> {
        let n = l.nrows();
        let inv = l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("M_L needs an invertible L".into()))?;
        let z = Mat::zeros(n, n);
        Ok(Self { n, s: from_blocks(&inv, &z, &z, &l.transpose()) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Mat {
        &self.s
    }

    pub fn into_matrix(self) -> Mat {
        self.s
    }

    pub fn a(&self) -> Mat {
        block(&self.s, 0, 0, self.n)
    }
    pub fn b(&self) -> Mat {
        block(&self.s, 0, 1, self.n)
    }
    pub fn c(&self) -> Mat {
        block(&self.s, 1, 0, self.n)
    }
    pub fn d(&self) -> Mat {
        block(&self.s, 1, 1, self.n)
    }

    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self { n: self.n, s: &self.s * &other.s }
    }

    /// S⁻¹ = −J Sᵀ J.
    pub fn inverse(&self) -> Self {
        let j = j_matrix(self.n);
        Self { n: self.n, s: -(&j * self.s.transpose() * &j) }
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        (&self.s * Vec64::from_column_slice(z)).iter().copied().collect()
    }

    /// True when S is also orthogonal (a symplectic rotation).
    pub fn is_rotation(&self, tol: f64) -> bool {
        max_abs(&(&self.s * self.s.transpose() - Mat::identity(2 * self.n, 2 * self.n))) <= tol
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymplecticRecord {
    pub n: usize,
    pub matrix: Vec<Vec<f64>>,
}

impl From<SymplecticMatrix> for SymplecticRecord {
    fn from(s: SymplecticMatrix) -> Self {
        Self { n: s.n, matrix: mat_to_rows(&s.s) }
    }
}

impl TryFrom<SymplecticRecord> for SymplecticMatrix {
    type Error = Error;
    fn try_from(r: SymplecticRecord) -> Result<Self> {
        let m = rows_to_mat(&r.matrix)?;
        if m.nrows() != 2 * r.n {
            return Err(Error::InvalidDimension(format!(
                "record says n={} but matrix is {}x{}",
                r.n,
                m.nrows(),
                m.ncols()
            )));
        }
        SymplecticMatrix::new(m)
    }
}

pub fn mat_to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

pub fn rows_to_mat(rows: &[Vec<f64>]) -> Result<Mat> {
    let r = rows.len();
    let c = rows.first().map_or(0, |v| v.len());
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::InvalidDimension("ragged matrix rows".into()));
    }
    Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
}

/// Factors S = V_P · M_L · R with R = [[U, V], [−V, U]].
#[derive(Clone, Debug, PartialEq)]
pub struct PreIwasawaFactors {
    pub p: Mat,
    pub l: Mat,
    pub u: Mat,
    pub v: Mat,
    pub r: Mat,
}

impl PreIwasawaFactors {
    pub fn reconstruct(&self) -> Mat {
        let vp = SymplecticMatrix::shear(&self.p).expect("P symmetric by construction");
        let ml = SymplecticMatrix::dilation(&self.l).expect("L invertible by construction");
        vp.matrix() * ml.matrix() * &self.r
    }

    /// Residuals of UUᵀ + VVᵀ = I, UVᵀ = VUᵀ and their transposed counterparts.
    pub fn rotation_residual(&self) -> f64 {
        let n = self.u.nrows();
        let i = Mat::identity(n, n);
        let (u, v) = (&self.u, &self.v);
        let r1 = max_abs(&(u * u.transpose() + v * v.transpose() - &i));
        let r2 = max_abs(&(u * v.transpose() - v * u.transpose()));
        let r3 = max_abs(&(u.transpose() * u + v.transpose() * v - &i));
        let r4 = max_abs(&(u.transpose() * v - v.transpose() * u));
        r1.max(r2).max(r3).max(r4)
    }
}

pub fn pre_iwasawa(s: &SymplecticMatrix) -> Result<PreIwasawaFactors> {
    let (a, b, c, d) = (s.a(), s.b(), s.c(), s.d());
    let g = symmetrize(&(&a * a.transpose() + &b * b.transpose()));
    let l = spd_inv_sqrt(&g)?;
    let ginv = &l * &l;
    let p = symmetrize(&(-(&c * a.transpose() + &d * b.transpose()) * ginv));
    let u = &l * &a;
    let v = &l * &b;
    let r = from_blocks(&u, &v, &(-&v), &u);
    Ok(PreIwasawaFactors { p, l, u, v, r })
}

/// Product of `word_length` random generators V_P, M_L, J drawn from a seeded ChaCha stream.
pub fn random_symplectic(n: usize, seed: u64, word_length: usize) -> Result<SymplecticMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SymplecticMatrix::identity(n);
    for _ in 0..word_length {
        let g = match rng.random_range(0..3u8) {
            0 => SymplecticMatrix::shear(&random_symmetric(&mut rng, n, 1.0))?,
            1 => SymplecticMatrix::dilation(&random_spd(&mut rng, n, 0.5))?,
            _ => SymplecticMatrix::j(n),
        };
        s = s.compose(&g);
    }
    Ok(s)
}

pub fn random_symmetric(rng: &mut impl Rng, n: usize, bound: f64) -> Mat {
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-bound..=bound);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> Mat {
    let m = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    m.qr().q()
}

/// Q diag(e^{s_j}) Qᵀ with |s_j| ≤ log_bound.
pub fn random_spd(rng: &mut impl Rng, n: usize, log_bound: f64) -> Mat {
    let q = random_orthogonal(rng, n);
    let d = Vec64::from_fn(n, |_, _| rng.random_range(-log_bound..=log_bound).exp());
    symmetrize(&(&q * Mat::from_diagonal(&d) * q.transpose()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymplecticSpectrum {
    pub eigenvalues: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Williamson symplectic eigenvalues: the moduli of the eigenvalue pairs ±iλ of JΣ.
///
/// Computed from the singular values of the antisymmetric matrix Σ^{1/2} J Σ^{1/2},
/// which has the same spectrum as JΣ and comes in equal pairs.
pub fn williamson_eigenvalues(sigma: &Mat) -> Result<SymplecticSpectrum> {
    let n = half_dim(sigma)?;
    if !is_symmetric(sigma, 1e-9) {
        return Err(Error::InvalidInput("covariance matrix is not symmetric".into()));
    }
    if !is_positive_definite(sigma) {
        return Err(Error::InvalidInput("covariance matrix is not positive definite".into()));
    }
    let root = crate::linalg::sym_fn(sigma, f64::sqrt);
    let k = &root * j_matrix(n) * &root;
    let mut sv: Vec<f64> = k.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| a.total_cmp(b));
    let eigenvalues = (0..n).map(|j| 0.5 * (sv[2 * j] + sv[2 * j + 1])).collect();
    Ok(SymplecticSpectrum { eigenvalues })
}
