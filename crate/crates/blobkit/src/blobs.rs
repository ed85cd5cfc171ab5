//! Quantum blobs and uncertainty tests on covariance matrices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{herm_eigenvalues, is_symmetric, max_abs, to_complex, Mat};
use crate::symplectic::{
    j_matrix, mat_to_rows, pre_iwasawa, rows_to_mat, williamson_eigenvalues, SymplecticMatrix,
    SymplecticSpectrum,
};

pub const TOL_PSD: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    sigma: Mat,
    mean: Vec<f64>,
}

impl CovarianceMatrix {
    pub fn new(sigma: Mat) -> Result<Self> {
        let dim = sigma.nrows();
        Self::with_mean(sigma, vec![0.0; dim])
    }

    pub fn with_mean(sigma: Mat, mean: Vec<f64>) -> Result<Self> {
        if !sigma.is_square() || sigma.nrows() % 2 != 0 || sigma.nrows() == 0 {
            return Err(Error::InvalidDimension("covariance must be 2n x 2n".into()));
        }
        if !is_symmetric(&sigma, 1e-12) {
            return Err(Error::InvalidInput("covariance matrix is not symmetric".into()));
        }
        if mean.len() != sigma.nrows() {
            return Err(Error::InvalidDimension("mean has the wrong length".into()));
        }
        Ok(Self { sigma, mean })
    }

    pub fn n(&self) -> usize {
        self.sigma.nrows() / 2
    }

    pub fn matrix(&self) -> &Mat {
        &self.sigma
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Δ(x_j, x_k)
    pub fn dxx(&self, j: usize, k: usize) -> f64 {
        self.sigma[(j, k)]
    }

    /// Δ(x_j, p_k)
    pub fn dxp(&self, j: usize, k: usize) -> f64 {
        self.sigma[(j, self.n() + k)]
    }

    /// Δ(p_j, p_k)
    pub fn dpp(&self, j: usize, k: usize) -> f64 {
        let n = self.n();
        self.sigma[(n + j, n + k)]
    }
}

/// JSON form: `{"sigma": [[...]], "mean": [...]}`, mean optional.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceRecord {
    pub sigma: Vec<Vec<f64>>,
    #[serde(default)]
    pub mean: Option<Vec<f64>>,
}

impl TryFrom<CovarianceRecord> for CovarianceMatrix {
    type Error = Error;
    fn try_from(r: CovarianceRecord) -> Result<Self> {
        let m = rows_to_mat(&r.sigma)?;
        let dim = m.nrows();
        Self::with_mean(m, r.mean.unwrap_or_else(|| vec![0.0; dim]))
    }
}

impl From<&CovarianceMatrix> for CovarianceRecord {
    fn from(c: &CovarianceMatrix) -> Self {
        Self { sigma: mat_to_rows(&c.sigma), mean: Some(c.mean.clone()) }
    }
}

fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidInput(format!("hbar must be positive, got {hbar}")));
    }
    Ok(())
}

/// Smallest eigenvalue of the Hermitian matrix Σ + (iħ/2)J.
pub fn rs2_min_eigenvalue(cov: &CovarianceMatrix, hbar: f64) -> Result<f64> {
    check_hbar(hbar)?;
    let j = to_complex(&j_matrix(cov.n())) * Complex64::new(0.0, hbar / 2.0);
    let h = to_complex(cov.matrix()) + j;
    Ok(herm_eigenvalues(&h)[0])
}

/// Σ + (iħ/2)J ⪰ 0.
pub fn uncertainty_psd(cov: &CovarianceMatrix, hbar: f64) -> Result<bool> {
    let scale = 1.0 + max_abs(cov.matrix());
    Ok(rs2_min_eigenvalue(cov, hbar)? >= -TOL_PSD * scale)
}

/// Δ(x_j,x_j)Δ(p_j,p_j) ≥ Δ(x_j,p_j)² + ħ²/4 for each j.
pub fn uncertainty_rs(cov: &CovarianceMatrix, hbar: f64) -> Result<Vec<bool>> {
    check_hbar(hbar)?;
    Ok((0..cov.n())
        .map(|j| {
            let lhs = cov.dxx(j, j) * cov.dpp(j, j);
            let rhs = cov.dxp(j, j).powi(2) + hbar * hbar / 4.0;
            lhs - rhs >= -TOL_PSD * (1.0 + lhs.abs())
        })
        .collect())
}

/// Symplectic capacity of Ω_Σ = {z : ½Σ⁻¹z·z ≤ 1}, equal to 2πλ_min(Σ).
pub fn ellipsoid_capacity(cov: &CovarianceMatrix, hbar: f64) -> Result<f64> {
    check_hbar(hbar)?;
    Ok(2.0 * std::f64::consts::PI * williamson_eigenvalues(cov.matrix())?.min())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub rs2_holds: bool,
    pub rs1_holds_per_j: Vec<bool>,
    pub symplectic_spectrum: SymplecticSpectrum,
    pub capacity: f64,
    pub saturated: bool,
}

pub fn uncertainty_report(cov: &CovarianceMatrix, hbar: f64) -> Result<UncertaintyReport> {
    let spectrum = williamson_eigenvalues(cov.matrix())?;
    let capacity = ellipsoid_capacity(cov, hbar)?;
    let rs2_holds = uncertainty_psd(cov, hbar)?;
    let rs1_holds_per_j = uncertainty_rs(cov, hbar)?;
    let saturated = (spectrum.min() - hbar / 2.0).abs() <= 1e-9 * hbar;
    Ok(UncertaintyReport { rs2_holds, rs1_holds_per_j, symplectic_spectrum: spectrum, capacity, saturated })
}

/// Q(S, z₀) = S(B²ⁿ(0, √ħ)) + z₀.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumBlob {
    pub s: SymplecticMatrix,
    pub z0: Vec<f64>,
    pub hbar: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlobNormalForm {
    pub p: Mat,
    pub l: Mat,
    pub z0: Vec<f64>,
}

impl QuantumBlob {
    pub fn new(s: SymplecticMatrix, z0: Vec<f64>, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if z0.len() != 2 * s.n() {
            return Err(Error::InvalidDimension("center has the wrong length".into()));
        }
        Ok(Self { s, z0, hbar })
    }

    pub fn centered(s: SymplecticMatrix, hbar: f64) -> Result<Self> {
        let dim = 2 * s.n();
        Self::new(s, vec![0.0; dim], hbar)
    }

    pub fn n(&self) -> usize {
        self.s.n()
    }

    pub fn normal_form(&self) -> Result<BlobNormalForm> {
        blob_normal_form(self)
    }

    /// Covariance (ħ/2)SSᵀ of the Gaussian attached to the blob.
    pub fn covariance(&self) -> CovarianceMatrix {
        let s = self.s.matrix();
        CovarianceMatrix::with_mean(s * s.transpose() * (self.hbar / 2.0), self.z0.clone())
            .expect("SSᵀ is symmetric")
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        let d: Vec<f64> = z.iter().zip(&self.z0).map(|(a, b)| a - b).collect();
        let w = self.s.inverse().apply(&d);
        w.iter().map(|v| v * v).sum::<f64>() <= self.hbar
    }

    /// Two blobs are equal iff their normal forms agree.
    pub fn same_as(&self, other: &Self, tol: f64) -> Result<bool> {
        if self.n() != other.n() {
            return Ok(false);
        }
        let a = self.normal_form()?;
        let b = other.normal_form()?;
        let zdiff = a.z0.iter().zip(&b.z0).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        Ok(max_abs(&(&a.p - &b.p)) <= tol && max_abs(&(&a.l - &b.l)) <= tol && zdiff <= tol)
    }
}

pub fn blob_normal_form(q: &QuantumBlob) -> Result<BlobNormalForm> {
    let f = pre_iwasawa(&q.s)?;
    Ok(BlobNormalForm { p: f.p, l: f.l, z0: q.z0.clone() })
}
