//! Generalized Gaussians ψ_XY^{z₀}, their Wigner transforms, the blob correspondence and
//! the canonical group of a blob.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blobs::QuantumBlob;
use crate::error::{Error, Result};
use crate::linalg::{
    from_blocks, is_positive_definite, is_symmetric, max_abs, spd_inv_sqrt, spd_sqrt, symmetrize,
    CMat, Mat, Vec64,
};
use crate::phasespace::{fft, SampleGrid, SampledState};
use crate::symplectic::{j_matrix, mat_to_rows, pre_iwasawa, rows_to_mat, SymplecticMatrix};

type CVec = DVector<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// ψ(x) = c·(det X)^{1/4}(πħ)^{−n/4} e^{−(X+iY)(x−x₀)·(x−x₀)/2ħ} e^{i(p₀·x − p₀·x₀/2)/ħ}.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    pub n: usize,
    pub x: Mat,
    pub y: Mat,
    pub z0: Vec<f64>,
    pub hbar: f64,
    pub phase: Complex64,
}

/// exp(−xᵀAx/2ħ + b·x/ħ + c)
#[derive(Clone, Debug)]
struct Quadratic {
    a: CMat,
    b: CVec,
    c: Complex64,
}

impl GaussianState {
    pub fn new(x: Mat, y: Mat, z0: Vec<f64>, hbar: f64) -> Result<Self> {
        let n = x.nrows();
        if n == 0 || !x.is_square() || y.shape() != x.shape() || z0.len() != 2 * n {
            return Err(Error::InvalidDimension("X, Y must be n x n and z0 of length 2n".into()));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidInput("hbar must be positive".into()));
        }
        if !is_symmetric(&y, 1e-10) {
            return Err(Error::InvalidInput("Y must be symmetric".into()));
        }
        if !is_positive_definite(&x) {
            return Err(Error::InvalidInput("X must be symmetric positive definite".into()));
        }
        Ok(Self { n, x: symmetrize(&x), y: symmetrize(&y), z0, hbar, phase: Complex64::new(1.0, 0.0) })
    }

    pub fn centered(x: Mat, y: Mat, hbar: f64) -> Result<Self> {
        let n = x.nrows();
        Self::new(x, y, vec![0.0; 2 * n], hbar)
    }

    /// φ₀^ħ: X = I, Y = 0, z₀ = 0.
    pub fn standard(n: usize, hbar: f64) -> Result<Self> {
        Self::centered(Mat::identity(n, n), Mat::zeros(n, n), hbar)
    }

    pub fn with_phase(mut self, phase: Complex64) -> Self {
        self.phase = phase;
        self
    }

    pub fn x0(&self) -> &[f64] {
        &self.z0[..self.n]
    }

    pub fn p0(&self) -> &[f64] {
        &self.z0[self.n..]
    }

    fn quadratic(&self) -> Quadratic {
        let a = self.x.map(|v| Complex64::new(v, 0.0)) + self.y.map(|v| Complex64::new(0.0, v));
        let x0 = CVec::from_iterator(self.n, self.x0().iter().map(|&v| Complex64::new(v, 0.0)));
        let p0 = CVec::from_iterator(self.n, self.p0().iter().map(|&v| Complex64::new(v, 0.0)));
        let h = self.hbar;
        let log_norm = 0.25 * self.x.determinant().ln() - 0.25 * self.n as f64 * (PI * h).ln();
        let b = &a * &x0 + &p0 * I;
        let quad = (x0.transpose() * &a * &x0)[(0, 0)];
        let lin = (p0.transpose() * &x0)[(0, 0)];
        let c = Complex64::new(log_norm, 0.0) - quad / (2.0 * h) - I * lin / (2.0 * h) + self.phase.ln();
        Quadratic { a, b, c }
    }

    fn from_quadratic(q: &Quadratic, hbar: f64) -> Result<Self> {
        let x = symmetrize(&q.a.map(|v| v.re));
        let y = symmetrize(&q.a.map(|v| v.im));
        let xinv = x
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NumericalDegeneracy("Re A is singular".into()))?;
        let x0 = &xinv * q.b.map(|v| v.re);
        let p0 = q.b.map(|v| v.im) - &y * &x0;
        let z0: Vec<f64> = x0.iter().chain(p0.iter()).copied().collect();
        let base = Self::new(x, y, z0, hbar)?;
        let phase = (q.c - base.quadratic().c).exp();
        Ok(base.with_phase(phase))
    }

    pub fn evaluate(&self, x: &[f64]) -> Complex64 {
        assert_eq!(x.len(), self.n);
        let q = self.quadratic();
        let xv = CVec::from_iterator(self.n, x.iter().map(|&v| Complex64::new(v, 0.0)));
        let e = -(xv.transpose() * &q.a * &xv)[(0, 0)] / (2.0 * self.hbar)
            + (q.b.transpose() * &xv)[(0, 0)] / self.hbar
            + q.c;
        e.exp()
    }

    /// Samples on a 1-D grid (n = 1 only).
    pub fn sample(&self, grid: SampleGrid) -> Result<SampledState> {
        if self.n != 1 {
            return Err(Error::InvalidDimension("grid sampling needs n = 1".into()));
        }
        if (grid.hbar - self.hbar).abs() > 1e-14 * self.hbar {
            return Err(Error::InvalidInput("grid and state use different hbar".into()));
        }
        Ok(SampledState::from_fn(grid, |x| self.evaluate(&[x])))
    }

    pub fn wigner_closed_form(&self) -> WignerGaussian {
        let s = sts_matrix(&self.x, &self.y).expect("X is positive definite");
        WignerGaussian { g: symmetrize(&(s.transpose() * &s)), z0: self.z0.clone(), hbar: self.hbar }
    }

    /// Same state up to a global phase.
    pub fn same_ray(&self, other: &Self, tol: f64) -> bool {
        let zd = self.z0.iter().zip(&other.z0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        self.n == other.n
            && max_abs(&(&self.x - &other.x)) <= tol
            && max_abs(&(&self.y - &other.y)) <= tol
            && zd <= tol
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianRecord {
    pub n: usize,
    pub hbar: f64,
    #[serde(rename = "X")]
    pub x: Vec<Vec<f64>>,
    #[serde(rename = "Y")]
    pub y: Vec<Vec<f64>>,
    pub z0: Vec<f64>,
}

impl TryFrom<GaussianRecord> for GaussianState {
    type Error = Error;
    fn try_from(r: GaussianRecord) -> Result<Self> {
        let x = rows_to_mat(&r.x)?;
        if x.nrows() != r.n {
            return Err(Error::InvalidDimension("X does not match n".into()));
        }
        GaussianState::new(x, rows_to_mat(&r.y)?, r.z0, r.hbar)
    }
}

impl From<&GaussianState> for GaussianRecord {
    fn from(s: &GaussianState) -> Self {
        Self { n: s.n, hbar: s.hbar, x: mat_to_rows(&s.x), y: mat_to_rows(&s.y), z0: s.z0.clone() }
    }
}

/// Wψ(z) = (πħ)^{−n} e^{−G(z−z₀)·(z−z₀)/ħ}.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGaussian {
    pub g: Mat,
    pub z0: Vec<f64>,
    pub hbar: f64,
}

impl WignerGaussian {
    pub fn n(&self) -> usize {
        self.g.nrows() / 2
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        let d = Vec64::from_iterator(z.len(), z.iter().zip(&self.z0).map(|(a, b)| a - b));
        let q = (d.transpose() * &self.g * &d)[(0, 0)];
        (PI * self.hbar).powi(-(self.n() as i32)) * (-q / self.hbar).exp()
    }

    /// Second moments (ħ/2)G⁻¹.
    pub fn covariance(&self) -> Mat {
        self.g.clone().try_inverse().expect("G is positive definite") * (self.hbar / 2.0)
    }
}

/// S = [[X^{1/2}, 0], [X^{−1/2}Y, X^{−1/2}]], so that G = SᵀS.
pub fn sts_matrix(x: &Mat, y: &Mat) -> Result<Mat> {
    let r = spd_sqrt(x)?;
    let ri = spd_inv_sqrt(x)?;
    let n = x.nrows();
    Ok(from_blocks(&r, &Mat::zeros(n, n), &(&ri * y), &ri))
}

/// S_XY = V_Y M_{X^{1/2}}, so that ψ_XY = Ŝ_XY φ₀.
pub fn s_xy(x: &Mat, y: &Mat) -> Result<SymplecticMatrix> {
    Ok(SymplecticMatrix::shear(y)?.compose(&SymplecticMatrix::dilation(&spd_sqrt(x)?)?))
}

/// Γ: the blob T(z₀)V_P M_L(B²ⁿ(√ħ)) goes to ψ_XY^{z₀} with X = L², Y = P.
pub fn from_blob(q: &QuantumBlob) -> Result<GaussianState> {
    let f = pre_iwasawa(&q.s)?;
    GaussianState::new(symmetrize(&(&f.l * &f.l)), f.p, q.z0.clone(), q.hbar)
}

/// Γ⁻¹: ψ_XY^{z₀} goes to Q(S_XY, z₀).
pub fn to_blob(psi: &GaussianState) -> Result<QuantumBlob> {
    QuantumBlob::new(s_xy(&psi.x, &psi.y)?, psi.z0.clone(), psi.hbar)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    /// V̂_P ψ = e^{−iPx·x/2ħ}ψ
    Shear(Mat),
    /// M̂_L ψ = √|det L| ψ(Lx)
    Dilation(Mat),
    /// Ĵψ = (2πiħ)^{−n/2}∫e^{−ix·x'/ħ}ψ(x')dx'
    J,
    /// T̂(w)
    Translation(Vec<f64>),
}

impl Generator {
    /// Linear symplectic map covered by the generator, if any.
    pub fn symplectic(&self, n: usize) -> Result<Option<SymplecticMatrix>> {
        Ok(match self {
            Generator::Shear(p) => Some(SymplecticMatrix::shear(p)?),
            Generator::Dilation(l) => Some(SymplecticMatrix::dilation(l)?),
            Generator::J => Some(SymplecticMatrix::j(n)),
            Generator::Translation(_) => None,
        })
    }

    /// Action on blobs: g·Q(S, z₀).
    pub fn act_on_blob(&self, q: &QuantumBlob) -> Result<QuantumBlob> {
        match self.symplectic(q.n())? {
            Some(s) => QuantumBlob::new(s.compose(&q.s), s.apply(&q.z0), q.hbar),
            None => {
                let Generator::Translation(w) = self else { unreachable!() };
                let z0 = q.z0.iter().zip(w).map(|(a, b)| a + b).collect();
                QuantumBlob::new(q.s.clone(), z0, q.hbar)
            }
        }
    }
}

/// Principal-branch log det(A) for A = X + iY, X ≻ 0, continued from A = X.
fn log_det_siegel(a: &CMat) -> Result<Complex64> {
    let x = symmetrize(&a.map(|v| v.re));
    let y = symmetrize(&a.map(|v| v.im));
    let ri = spd_inv_sqrt(&x)?;
    let k = symmetrize(&(&ri * &y * &ri));
    let mu = k.symmetric_eigenvalues();
    let mut acc = Complex64::new(x.determinant().ln(), 0.0);
    for m in mu.iter() {
        acc += Complex64::new(1.0, *m).ln();
    }
    Ok(acc)
}

pub fn apply_generator(psi: &GaussianState, g: &Generator) -> Result<GaussianState> {
    let n = psi.n;
    let h = psi.hbar;
    let q = psi.quadratic();
    let to_c = |m: &Mat| m.map(|v| Complex64::new(v, 0.0));
    let out = match g {
        Generator::Shear(p) => {
            if p.shape() != (n, n) || !is_symmetric(p, 1e-12) {
                return Err(Error::InvalidInput("V_P needs a symmetric n x n P".into()));
            }
            Quadratic { a: &q.a + to_c(p) * I, ..q }
        }
        Generator::Dilation(l) => {
            if l.shape() != (n, n) {
                return Err(Error::InvalidDimension("L must be n x n".into()));
            }
            let det = l.determinant();
            if det.abs() < 1e-300 || !det.is_finite() {
                return Err(Error::InvalidInput("M_L needs an invertible L".into()));
            }
            let lc = to_c(l);
            Quadratic {
                a: lc.transpose() * &q.a * &lc,
                b: lc.transpose() * &q.b,
                c: q.c + 0.5 * det.abs().ln(),
            }
        }
        Generator::J => {
            let ainv = q
                .a
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::NumericalDegeneracy("X + iY is singular".into()))?;
            let bab = (q.b.transpose() * &ainv * &q.b)[(0, 0)];
            let logdet = log_det_siegel(&q.a)?;
            Quadratic {
                b: &ainv * &q.b * (-I),
                c: q.c + bab / (2.0 * h) - 0.5 * logdet - I * (n as f64 * PI / 4.0),
                a: ainv,
            }
        }
        Generator::Translation(w) => {
            if w.len() != 2 * n {
                return Err(Error::InvalidDimension("translation must have length 2n".into()));
            }
            let x0 = CVec::from_iterator(n, w[..n].iter().map(|&v| Complex64::new(v, 0.0)));
            let p0 = CVec::from_iterator(n, w[n..].iter().map(|&v| Complex64::new(v, 0.0)));
            let quad = (x0.transpose() * &q.a * &x0)[(0, 0)];
            let bx = (q.b.transpose() * &x0)[(0, 0)];
            let px = (p0.transpose() * &x0)[(0, 0)];
            Quadratic {
                b: &q.b + &q.a * &x0 + &p0 * I,
                c: q.c - quad / (2.0 * h) - bx / h - I * px / (2.0 * h),
                a: q.a,
            }
        }
    };
    GaussianState::from_quadratic(&out, h)
}

/// M_XY = (S_XY⁻¹)ᵀ D_X S_XY⁻¹ with D_X = diag(X, X); H_XY(z) = ½M_XY z·z.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalGroupSpec {
    pub m_xy: Mat,
    pub trace_x: f64,
}

impl CanonicalGroupSpec {
    pub fn new(x: &Mat, y: &Mat) -> Result<Self> {
        let sinv = s_xy(x, y)?.inverse();
        let n = x.nrows();
        let z = Mat::zeros(n, n);
        let d = from_blocks(x, &z, &z, x);
        let m = symmetrize(&(sinv.matrix().transpose() * d * sinv.matrix()));
        Ok(Self { m_xy: m, trace_x: x.trace() })
    }

    pub fn hamiltonian(&self, z: &[f64]) -> f64 {
        let v = Vec64::from_column_slice(z);
        0.5 * (v.transpose() * &self.m_xy * &v)[(0, 0)]
    }
}

/// S_t = exp(tJM_XY): the flow of ż = J∇H_XY.
pub fn canonical_flow(x: &Mat, y: &Mat, t: f64, hbar: f64) -> Result<SymplecticMatrix> {
    if !(hbar > 0.0) {
        return Err(Error::InvalidInput("hbar must be positive".into()));
    }
    let spec = CanonicalGroupSpec::new(x, y)?;
    let gen = j_matrix(x.nrows()) * &spec.m_xy * t;
    SymplecticMatrix::with_tol(gen.exp(), 1e-8)
}

/// Ĥ_XY = ½(p̂ + Yx)² + ½X²x² on a 1-D grid, as a matrix acting on samples.
///
/// p̂ = −iħ d/dx is the spectral derivative with the Nyquist mode dropped, so that the
/// matrix is Hermitian and real-symmetric in its kinetic part.
pub fn hamiltonian_xy_grid(x: f64, y: f64, grid: &SampleGrid) -> CMat {
    let n = grid.n;
    let p = momentum_matrix(grid);
    let xs = grid.xs();
    let q = CMat::from_fn(n, n, |r, c| if r == c { Complex64::new(y * xs[r], 0.0) } else { Complex64::new(0.0, 0.0) });
    let k = &p + &q;
    let pot = CMat::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::new(0.5 * x * x * xs[r] * xs[r], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    (&k * &k) * Complex64::new(0.5, 0.0) + pot
}

/// Spectral momentum operator −iħ d/dx on the grid.
pub fn momentum_matrix(grid: &SampleGrid) -> CMat {
    let n = grid.n;
    let mut m = CMat::zeros(n, n);
    let dp = grid.dp();
    for col in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[col] = Complex64::new(1.0, 0.0);
        fft::fft_in_place(&mut e, false);
        for (k, v) in e.iter_mut().enumerate() {
            let f = if k == n / 2 { 0.0 } else { fft::signed_freq(k, n) };
            *v *= f * dp / n as f64;
        }
        fft::fft_in_place(&mut e, true);
        for r in 0..n {
            m[(r, col)] = e[r];
        }
    }
    m
}

/// Crank–Nicolson propagation of iħ∂ₜψ = Ĥψ for time t in `steps` equal steps.
pub fn crank_nicolson(h: &CMat, psi: &SampledState, t: f64, steps: usize, hbar: f64) -> Result<SampledState> {
    let n = h.nrows();
    if n != psi.grid.n || steps == 0 {
        return Err(Error::InvalidInput("dimension mismatch or zero steps".into()));
    }
    let dt = t / steps as f64;
    let a = Complex64::new(0.0, dt / (2.0 * hbar));
    let id = CMat::identity(n, n);
    let lhs = (&id + h * a).lu();
    let rhs = &id - h * a;
    let mut v = CVec::from_column_slice(&psi.values);
    for _ in 0..steps {
        let r = &rhs * &v;
        v = lhs.solve(&r).ok_or_else(|| Error::NumericalDegeneracy("singular Crank-Nicolson system".into()))?;
    }
    SampledState::new(psi.grid, v.iter().copied().collect())
}
