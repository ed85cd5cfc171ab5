//! Weyl–Heisenberg (Gabor) systems G(φ, Λ) = {T̂(λ)φ : λ ∈ Λ} on the 1-D sample grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{herm_eigen, CMat, Mat};
use crate::phasespace::{fft, SampleGrid, SampledState};
use crate::symplectic::{mat_to_rows, rows_to_mat, SymplecticMatrix};
use crate::weyl::{heisenberg_apply, DiscretizedOperator};

/// Eigenvalue threshold selecting states concentrated in the interior box.
pub const INTERIOR_THRESHOLD: f64 = 1e-10;
/// Interior margin in window widths.
pub const MARGIN_WIDTHS: f64 = 3.0;

/// Λ = M(ℤ²ⁿ) truncated to the disk |z| ≤ ρ.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub m: Mat,
    pub rho: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeRecord {
    #[serde(default, rename = "M")]
    pub m: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    pub rho: f64,
}

impl Lattice {
    pub fn new(m: Mat, rho: f64) -> Result<Self> {
        if !m.is_square() || m.nrows() % 2 != 0 || m.nrows() == 0 {
            return Err(Error::InvalidDimension("lattice generator must be 2n x 2n".into()));
        }
        let det = m.determinant();
        if !(det.is_finite() && det.abs() > 1e-14) {
            return Err(Error::InvalidInput("lattice generator is singular".into()));
        }
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::InvalidInput("truncation radius must be finite and nonnegative".into()));
        }
        Ok(Self { m, rho })
    }

    /// αℤ × βℤ (n = 1).
    pub fn separable(alpha: f64, beta: f64, rho: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::InvalidInput("alpha and beta must be positive".into()));
        }
        Self::new(Mat::from_row_slice(2, 2, &[alpha, 0.0, 0.0, beta]), rho)
    }

    /// Square lattice with αβ = density·2πħ and α = β.
    pub fn square_with_density(density: f64, hbar: f64, rho: f64) -> Result<Self> {
        let a = (density * 2.0 * PI * hbar).sqrt();
        Self::separable(a, a, rho)
    }

    pub fn n(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn cell_volume(&self) -> f64 {
        self.m.determinant().abs()
    }

    /// Cell volume in units of (2πħ)ⁿ.
    pub fn density(&self, hbar: f64) -> f64 {
        self.cell_volume() / (2.0 * PI * hbar).powi(self.n() as i32)
    }

    /// SΛ with the same truncation radius.
    pub fn transformed(&self, s: &SymplecticMatrix) -> Result<Self> {
        if s.n() != self.n() {
            return Err(Error::InvalidDimension("symplectic matrix and lattice differ in n".into()));
        }
        Self::new(s.matrix() * &self.m, self.rho)
    }

    /// Points of Λ with |z| ≤ ρ, sorted by |z| and then lexicographically.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let dim = self.m.nrows();
        let minv = self.m.clone().try_inverse().expect("checked invertible");
        let bound = (self.rho * minv.norm()).ceil() as i64;
        let mut out = Vec::new();
        let mut k = vec![-bound; dim];
        let r2 = self.rho * self.rho * (1.0 + 1e-12);
        loop {
            let z: Vec<f64> = (0..dim).map(|r| (0..dim).map(|c| self.m[(r, c)] * k[c] as f64).sum()).collect();
            if z.iter().map(|v| v * v).sum::<f64>() <= r2 {
                out.push(z);
            }
            let mut i = 0;
            while i < dim {
                k[i] += 1;
                if k[i] <= bound {
                    break;
                }
                k[i] = -bound;
                i += 1;
            }
            if i == dim {
                break;
            }
        }
        out.sort_by(|a, b| {
            let na: f64 = a.iter().map(|v| v * v).sum();
            let nb: f64 = b.iter().map(|v| v * v).sum();
            na.total_cmp(&nb).then_with(|| {
                a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        out
    }
}

impl TryFrom<LatticeRecord> for Lattice {
    type Error = Error;
    fn try_from(r: LatticeRecord) -> Result<Self> {
        match (r.m, r.alpha, r.beta) {
            (Some(m), None, None) => Self::new(rows_to_mat(&m)?, r.rho),
            (None, Some(a), Some(b)) => Self::separable(a, b, r.rho),
            _ => Err(Error::Parse("lattice needs either M or both alpha and beta".into())),
        }
    }
}

impl From<&Lattice> for LatticeRecord {
    fn from(l: &Lattice) -> Self {
        Self { m: Some(mat_to_rows(&l.m)), alpha: None, beta: None, rho: l.rho }
    }
}

/// Smallest truncation radius whose disk contains the grid's fundamental cell.
pub fn covering_radius(g: &SampleGrid) -> f64 {
    let xc = g.x0 + g.length() / 2.0;
    ((xc.abs() + g.length() / 2.0).powi(2) + g.p_max().powi(2)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub a: f64,
    pub b: f64,
}

impl FrameBounds {
    pub fn ratio(&self) -> f64 {
        self.a / self.b
    }
}

/// G(φ, Λ) on a grid. Only lattice points inside the grid's fundamental phase-space cell
/// [x₀, x₀ + L) × [−p_max, p_max) are used, so that no two sites alias on the periodic grid.
#[derive(Clone, Debug)]
pub struct WHSystem {
    pub window: SampledState,
    pub lattice: Lattice,
    pub hbar: f64,
}

#[derive(Clone, Debug)]
pub struct Expansion {
    pub sites: Vec<[f64; 2]>,
    pub coefficients: Vec<Complex64>,
    /// (2πħ)Amb(ψ, φ)(λ), computed independently of the coefficients.
    pub ambiguity_coefficients: Vec<Complex64>,
    pub reconstruction: SampledState,
    pub relative_error: f64,
    pub ambiguity_gap: f64,
}

impl WHSystem {
    pub fn new(window: SampledState, lattice: Lattice) -> Result<Self> {
        if lattice.n() != 1 {
            return Err(Error::InvalidDimension("grid Gabor systems need n = 1".into()));
        }
        if (window.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidInput(format!("window norm is {}, expected 1", window.norm())));
        }
        let hbar = window.grid.hbar;
        Ok(Self { window, lattice, hbar })
    }

    pub fn grid(&self) -> SampleGrid {
        self.window.grid
    }

    /// Enumerated lattice points that fall in the grid's fundamental cell, in enumeration order.
    pub fn sites(&self) -> Vec<[f64; 2]> {
        let g = self.grid();
        let pm = g.p_max();
        let tol = 1e-9 * g.dx;
        self.lattice
            .points()
            .into_iter()
            .filter(|z| z[0] >= g.x0 - tol && z[0] < g.x0 + g.length() - tol && z[1] >= -pm - tol && z[1] < pm - tol)
            .map(|z| [z[0], z[1]])
            .collect()
    }

    pub fn atom(&self, site: [f64; 2]) -> SampledState {
        heisenberg_apply(&self.window, site)
    }

    pub fn atoms(&self) -> Vec<SampledState> {
        self.sites().into_par_iter().map(|s| self.atom(s)).collect()
    }

    /// 2·max(σ_x, σ_p) of the window.
    pub fn window_width(&self) -> f64 {
        let g = self.grid();
        let (sx, _) = spread(&self.window.values, &g.xs(), g.dx);
        let (sp, _) = spread(&self.window.momentum_amplitudes(), &g.ps(), g.dp());
        2.0 * sx.max(sp)
    }

    /// Half-sizes of the interior box, shrunk by `MARGIN_WIDTHS` window widths.
    pub fn interior_box(&self) -> (f64, f64) {
        let g = self.grid();
        let m = MARGIN_WIDTHS * self.window_width();
        (g.length() / 2.0 - m, g.p_max() - m)
    }

    /// Estimated fraction of the grid cell not reached by the truncated lattice, or None
    /// when ρ covers the whole cell.
    pub fn truncation_tail(&self) -> Option<f64> {
        let g = self.grid();
        let (xc, hx, hp) = (g.x0 + g.length() / 2.0, g.length() / 2.0, g.p_max());
        if self.lattice.rho >= covering_radius(&g) {
            return None;
        }
        let m = 64;
        let mut outside = 0usize;
        for i in 0..m {
            for k in 0..m {
                let x = xc - hx + (i as f64 + 0.5) * 2.0 * hx / m as f64;
                let p = -hp + (k as f64 + 0.5) * 2.0 * hp / m as f64;
                if x * x + p * p > self.lattice.rho.powi(2) {
                    outside += 1;
                }
            }
        }
        Some(outside as f64 / (m * m) as f64)
    }

    /// Σ_λ |φ_λ⟩⟨φ_λ| as a matrix on samples.
    pub fn frame_operator(&self) -> DiscretizedOperator {
        let ones = vec![Complex64::new(1.0, 0.0); self.sites().len()];
        self.weighted_sum(&ones, "frame operator")
    }

    fn weighted_sum(&self, weights: &[Complex64], label: &str) -> DiscretizedOperator {
        let g = self.grid();
        let n = g.n;
        let atoms = self.atoms();
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|r| {
                let mut row = vec![Complex64::new(0.0, 0.0); n];
                for (a, w) in atoms.iter().zip(weights) {
                    if *w == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let ar = a.values[r] * w * g.dx;
                    for (c, v) in row.iter_mut().enumerate() {
                        *v += ar * a.values[c].conj();
                    }
                }
                row
            })
            .collect();
        let m = CMat::from_fn(n, n, |r, c| rows[r][c]);
        DiscretizedOperator { grid: g, matrix: m, label: label.into() }
    }

    /// Orthonormal columns spanning grid states concentrated in the interior box.
    pub fn interior_basis(&self) -> Result<CMat> {
        let g = self.grid();
        let (hx, hp) = self.interior_box();
        if hx <= 0.0 || hp <= 0.0 {
            return Err(Error::Truncation("window too wide for the grid: empty interior box".into()));
        }
        let n = g.n;
        let xc = g.x0 + g.length() / 2.0;
        let xs = g.xs();
        let ps = g.ps();
        let c = 1.0 / (n as f64).sqrt();
        let f = CMat::from_fn(n, n, |k, j| Complex64::from_polar(c, -ps[k] * xs[j] / g.hbar));
        let inside_x: Vec<bool> = xs.iter().map(|x| (x - xc).abs() <= hx).collect();
        let inside_p: Vec<bool> = ps.iter().map(|p| p.abs() <= hp).collect();
        let mut fx = f.clone();
        for j in 0..n {
            if !inside_x[j] {
                fx.column_mut(j).fill(Complex64::new(0.0, 0.0));
            }
        }
        for k in 0..n {
            if !inside_p[k] {
                fx.row_mut(k).fill(Complex64::new(0.0, 0.0));
            }
        }
        let t = fx.adjoint() * &fx;
        let (vals, vecs) = herm_eigen(&t);
        let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > 1.0 - INTERIOR_THRESHOLD).collect();
        if keep.is_empty() {
            return Err(Error::Truncation("no grid states fit in the interior box".into()));
        }
        Ok(CMat::from_fn(n, keep.len(), |r, c| vecs[(r, keep[c])]))
    }

    /// Finite-section frame bounds: extreme eigenvalues of the frame operator compressed to
    /// the interior subspace.
    pub fn frame_bounds(&self) -> Result<FrameBounds> {
        if let Some(tail) = self.truncation_tail() {
            return Err(Error::Truncation(format!(
                "rho = {} does not cover the grid cell; uncovered fraction {tail:.3}",
                self.lattice.rho
            )));
        }
        let q = self.interior_basis()?;
        let s = self.frame_operator();
        let c = q.adjoint() * &s.matrix * &q;
        let (vals, _) = herm_eigen(&c);
        let b = *vals.last().expect("nonempty basis");
        Ok(FrameBounds { a: vals[0].max(0.0), b })
    }

    /// Coefficients (ψ|φ_λ) and the canonical-dual reconstruction S⁻¹Σ c_λ φ_λ.
    pub fn expand(&self, psi: &SampledState) -> Result<Expansion> {
        let g = self.grid();
        g.require_same(&psi.grid)?;
        let bounds = self.frame_bounds()?;
        if bounds.a <= 1e-6 * bounds.b {
            return Err(Error::NoFrame(format!("a/b = {:.3e} at density {:.3}", bounds.ratio(), self.lattice.density(self.hbar))));
        }
        let sites = self.sites();
        let atoms = self.atoms();
        let coefficients: Vec<Complex64> = atoms.par_iter().map(|a| psi.inner(a)).collect();
        let ambiguity_coefficients: Vec<Complex64> =
            sites.par_iter().map(|&z| 2.0 * PI * self.hbar * ambiguity_at(psi, &self.window, z)).collect();
        let ambiguity_gap = coefficients
            .iter()
            .zip(&ambiguity_coefficients)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));

        let mut synth = vec![Complex64::new(0.0, 0.0); g.n];
        for (a, c) in atoms.iter().zip(&coefficients) {
            for (s, v) in synth.iter_mut().zip(&a.values) {
                *s += c * v;
            }
        }
        let values = CanonicalDual::from_frame(&self.frame_operator(), bounds.b).solve(&synth);
        let reconstruction = SampledState { grid: g, values };
        let relative_error = reconstruction.distance(psi) / psi.norm();
        Ok(Expansion { sites, coefficients, ambiguity_coefficients, reconstruction, relative_error, ambiguity_gap })
    }

    pub fn canonical_dual(&self) -> Result<CanonicalDual> {
        let b = self.frame_bounds()?.b;
        Ok(CanonicalDual::from_frame(&self.frame_operator(), b))
    }

    /// Σ_λ a_λ(·|φ_λ)φ_λ, weights in site order.
    pub fn multiplier(&self, weights: &[Complex64]) -> Result<DiscretizedOperator> {
        let n = self.sites().len();
        if weights.len() != n {
            return Err(Error::InvalidDimension(format!("expected {n} weights, got {}", weights.len())));
        }
        if weights.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(Error::InvalidInput("weights must be finite".into()));
        }
        Ok(self.weighted_sum(weights, "Gabor multiplier"))
    }

    /// Σ_μ λ_μ|φ_μ⟩⟨φ_μ| for probabilities in site order.
    pub fn density(&self, probabilities: &[f64]) -> Result<DiscretizedOperator> {
        if probabilities.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidInput("probabilities must be nonnegative".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}, expected 1")));
        }
        let w: Vec<Complex64> = probabilities.iter().map(|&p| Complex64::new(p, 0.0)).collect();
        let mut op = self.multiplier(&w)?;
        op.label = "Gabor density".into();
        Ok(op)
    }
}

/// Standard deviation and mean of |v|² against the coordinate list.
fn spread(v: &[Complex64], coords: &[f64], step: f64) -> (f64, f64) {
    let w: Vec<f64> = v.iter().map(|c| c.norm_sqr() * step).collect();
    let total: f64 = w.iter().sum();
    let mean = w.iter().zip(coords).map(|(a, x)| a * x).sum::<f64>() / total;
    let var = w.iter().zip(coords).map(|(a, x)| a * (x - mean).powi(2)).sum::<f64>() / total;
    (var.sqrt(), mean)
}

/// Amb(ψ, φ)(x, p) = (2πħ)⁻¹∫e^{−ipu/ħ}ψ(u + x/2)φ̄(u − x/2)du at an arbitrary point.
pub fn ambiguity_at(psi: &SampledState, phi: &SampledState, z: [f64; 2]) -> Complex64 {
    let g = psi.grid;
    let h = z[0] / (2.0 * g.dx);
    let a = fft::fourier_shift(&psi.values, -h);
    let b = fft::fourier_shift(&phi.values, h);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..g.n {
        acc += a[j] * b[j].conj() * Complex64::from_polar(1.0, -z[1] * g.x(j) / g.hbar);
    }
    acc * g.dx / (2.0 * PI * g.hbar)
}

/// Spectral pseudo-inverse of a frame operator. Boundary modes with eigenvalue below
/// 1e−6·b are dropped.
#[derive(Clone, Debug)]
pub struct CanonicalDual {
    grid: SampleGrid,
    values: Vec<f64>,
    vectors: CMat,
    cutoff: f64,
}

impl CanonicalDual {
    pub fn from_frame(s: &DiscretizedOperator, b: f64) -> Self {
        let (values, vectors) = herm_eigen(&s.matrix);
        Self { grid: s.grid, values, vectors, cutoff: 1e-6 * b }
    }

    pub fn solve(&self, v: &[Complex64]) -> Vec<Complex64> {
        let x = nalgebra::DVector::from_column_slice(v);
        let mut coeff = self.vectors.adjoint() * x;
        for (c, &l) in coeff.iter_mut().zip(&self.values) {
            *c = if l > self.cutoff { *c / l } else { Complex64::new(0.0, 0.0) };
        }
        (&self.vectors * coeff).iter().copied().collect()
    }

    /// S⁻¹φ_λ.
    pub fn dual_atom(&self, sys: &WHSystem, site: [f64; 2]) -> SampledState {
        SampledState { grid: self.grid, values: self.solve(&sys.atom(site).values) }
    }
}
