//! Toeplitz (anti-Wick) operators (2πħ)⁻¹∫a(z)|φ_z⟩⟨φ_z|dz, blob operators, density
//! matrices built from phase-space densities, and the semiclassical sweep.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian_states::GaussianState;
use crate::linalg::{CMat, Mat};
use crate::phasespace::fft::{fft_in_place, fourier_shift};
use crate::phasespace::{
    convolve_periodic_sampled, cross_wigner, cross_wigner_unchecked, s0_norm, PhaseSpaceFunction, SampleGrid,
    SampledState,
};
use crate::weyl::{weyl_quantize, DiscretizedOperator, Symbol, SymbolSamples};

#[derive(Clone, Debug)]
pub enum Window {
    Sampled(SampledState),
    Gaussian(GaussianState),
}

impl Window {
    pub fn sample(&self, grid: &SampleGrid) -> Result<SampledState> {
        match self {
            Window::Sampled(s) => {
                grid.require_same(&s.grid)?;
                Ok(s.clone())
            }
            Window::Gaussian(g) => g.sample(*grid),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ToeplitzSpec {
    pub symbol: Symbol,
    pub window: Window,
    pub hbar: f64,
}

impl ToeplitzSpec {
    pub fn new(symbol: Symbol, window: Window, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidInput("hbar must be positive".into()));
        }
        Ok(Self { symbol, window, hbar })
    }

    /// Standard Gaussian window φ₀.
    pub fn anti_wick(symbol: Symbol, hbar: f64) -> Result<Self> {
        Self::new(symbol, Window::Gaussian(GaussianState::standard(1, hbar)?), hbar)
    }
}

/// Samples the window and checks unit norm and S₀ membership on the grid.
pub fn admissible_window(spec: &ToeplitzSpec, grid: &SampleGrid) -> Result<SampledState> {
    if (grid.hbar - spec.hbar).abs() > 1e-14 * spec.hbar {
        return Err(Error::InvalidInput("grid and spec use different hbar".into()));
    }
    let w = spec.window.sample(grid)?;
    if (w.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidInput(format!("window norm is {}, expected 1", w.norm())));
    }
    let phi0 = SampledState::standard_gaussian(*grid);
    let s0 = s0_norm(&w, &phi0)?;
    if !s0.is_finite() {
        return Err(Error::InvalidInput("window is not in S0 on this grid".into()));
    }
    Ok(w)
}

fn zero_index(grid: &SampleGrid) -> Result<usize> {
    let i0 = -grid.x0 / grid.dx;
    if (i0 - i0.round()).abs() > 1e-9 || i0 < 0.0 || i0.round() as usize >= grid.n {
        return Err(Error::InvalidInput("x = 0 must be a grid point".into()));
    }
    Ok(i0.round() as usize)
}

/// Direct quadrature on the grid lattice, using every `stride`-th node in x and p.
///
/// K(x_j, x_l) = (2πħ)⁻¹ Σ_{i,k} a(x_i, p_k) φ(x_j − x_i) φ̄(x_l − x_i) e^{ip_k(x_j − x_l)/ħ} Δx Δp.
pub fn toeplitz_quantize_with(spec: &ToeplitzSpec, grid: &SampleGrid, stride: usize) -> Result<DiscretizedOperator> {
    if stride == 0 {
        return Err(Error::InvalidInput("stride must be at least 1".into()));
    }
    let spacing = stride as f64 * grid.dx.max(grid.dp());
    if spacing > grid.hbar.sqrt() / 2.0 {
        return Err(Error::Resolution(format!(
            "quadrature spacing {spacing:.4} exceeds sqrt(hbar)/2 = {:.4}",
            grid.hbar.sqrt() / 2.0
        )));
    }
    let phi = admissible_window(spec, grid)?;
    let i0 = zero_index(grid)?;
    let n = grid.n;
    let a = spec.symbol.sample_on(grid)?;
    let dp = grid.dp();
    let nodes: Vec<usize> = (0..n).step_by(stride).collect();
    // g[i][m] = Σ_k a(x_i, p_k) e^{ip_k m dx/ħ} Δp
    let g: Vec<Vec<Complex64>> = nodes
        .par_iter()
        .map(|&i| {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            for k in (0..n).step_by(stride) {
                row[k] = a.get(i, k);
            }
            fft_in_place(&mut row, true);
            for (m, v) in row.iter_mut().enumerate() {
                *v *= if m % 2 == 0 { 1.0 } else { -1.0 } * dp * stride as f64;
            }
            row
        })
        .collect();
    let scale = grid.dx * stride as f64 / (2.0 * PI * grid.hbar) * grid.dx;
    let win = |d: isize| phi.values[(d + i0 as isize).rem_euclid(n as isize) as usize];
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            for (gi, &i) in g.iter().zip(&nodes) {
                let wj = win(j as isize - i as isize);
                if wj == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (l, v) in row.iter_mut().enumerate() {
                    let m = (j + n - l) % n;
                    *v += wj * win(l as isize - i as isize).conj() * gi[m];
                }
            }
            row.iter_mut().for_each(|v| *v *= scale);
            row
        })
        .collect();
    let m = CMat::from_fn(n, n, |r, c| rows[r][c]);
    DiscretizedOperator::new(*grid, m, format!("toeplitz({:?})", spec.symbol))
}

pub fn toeplitz_quantize(spec: &ToeplitzSpec, grid: &SampleGrid) -> Result<DiscretizedOperator> {
    toeplitz_quantize_with(spec, grid, 1)
}

/// a ∗ Wφ on the grid and at the half-shifted points (x_i + dx/2, p_k).
pub fn smoothed_symbol(a: &PhaseSpaceFunction, window: &SampledState) -> Result<SymbolSamples> {
    let grid = window.grid;
    if !grid.is_centered() {
        return Err(Error::InvalidInput("smoothing needs a centered grid".into()));
    }
    let w = cross_wigner(window, window)?;
    let shifted = SampledState { grid, values: fourier_shift(&window.values, -0.5) };
    let wh = cross_wigner_unchecked(&shifted, &shifted);
    let on_grid = convolve_periodic_sampled(a, &w);
    let half = convolve_periodic_sampled(a, &wh);
    SymbolSamples::new(on_grid, half)
}

/// Weyl quantization of the smoothed symbol a ∗ Wφ.
pub fn toeplitz_via_weyl(spec: &ToeplitzSpec, grid: &SampleGrid) -> Result<DiscretizedOperator> {
    let phi = admissible_window(spec, grid)?;
    let a = spec.symbol.sample_on(grid)?;
    let b = smoothed_symbol(&a, &phi)?;
    let mut op = weyl_quantize(&Symbol::Sampled(b), grid)?;
    op.label = format!("toeplitz_via_weyl({:?})", spec.symbol);
    Ok(op)
}

/// Toeplitz operator with the window ψ_XY.
pub fn blob_operator(a: Symbol, x: f64, y: f64, grid: &SampleGrid) -> Result<DiscretizedOperator> {
    let h = grid.hbar;
    let psi = GaussianState::centered(Mat::from_element(1, 1, x), Mat::from_element(1, 1, y), h)?;
    toeplitz_via_weyl(&ToeplitzSpec::new(a, Window::Gaussian(psi), h)?, grid)
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub operator: DiscretizedOperator,
    pub trace: f64,
    pub min_eigenvalue: f64,
    /// Eigenvalues in decreasing order.
    pub spectrum: Vec<f64>,
    pub eigenstates: Vec<SampledState>,
}

/// Tolerances on the probability density as sampled on the grid.
const MU_NEG_TOL: f64 = 1e-12;
const MU_NORM_TOL: f64 = 1e-8;

/// ρ̂ = (2πħ)·Op_TO^φ(μ) by direct quadrature.
pub fn density_matrix(mu: &Symbol, window: Window, grid: &SampleGrid) -> Result<DensityMatrix> {
    let h = grid.hbar;
    let samples = mu.sample_on(grid)?;
    let peak = samples.max_abs();
    if samples.max_imag() > MU_NEG_TOL * peak.max(1.0) || samples.min_real() < -MU_NEG_TOL * peak.max(1.0) {
        return Err(Error::InvalidInput("mu must be real and nonnegative".into()));
    }
    let total = samples.integral().re;
    if (total - 1.0).abs() > MU_NORM_TOL {
        return Err(Error::InvalidInput(format!("mu integrates to {total} on the grid, expected 1")));
    }
    let spec = ToeplitzSpec::new(mu.clone(), window, h)?;
    let op = toeplitz_quantize(&spec, grid)?.scale(Complex64::new(2.0 * PI * h, 0.0));
    let (mut vals, mut states) = op.hermitian_eigen();
    vals.reverse();
    states.reverse();
    Ok(DensityMatrix {
        trace: op.trace().re,
        min_eigenvalue: *vals.last().expect("nonempty"),
        spectrum: vals,
        eigenstates: states,
        operator: DiscretizedOperator { label: "density".into(), ..op },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceChecks {
    pub matrix_trace: f64,
    pub smoothed_integral: f64,
    pub fourier_product: f64,
}

impl DensityMatrix {
    /// Tr ρ̂ as a matrix trace, as ∫(μ ∗ Wφ)dz, and as (2πħ)²F_σμ(0)F_σWφ(0) = ∫μ·∫Wφ.
    pub fn trace_checks(&self, mu: &Symbol, window: &SampledState) -> Result<TraceChecks> {
        let grid = self.operator.grid;
        let a = mu.sample_on(&grid)?;
        let w = cross_wigner(window, window)?;
        let smoothed = convolve_periodic_sampled(&a, &w);
        Ok(TraceChecks {
            matrix_trace: self.trace,
            smoothed_integral: smoothed.integral().re,
            fourier_product: a.integral().re * w.integral().re,
        })
    }

    /// max |μ ∗ Wφ − Σ_j λ_j Wφ_j| over the grid, summing eigenvalues above `cutoff`.
    pub fn spectral_identity_residual(&self, mu: &Symbol, window: &SampledState, cutoff: f64) -> Result<f64> {
        let grid = self.operator.grid;
        let a = mu.sample_on(&grid)?;
        let w = cross_wigner(window, window)?;
        let smoothed = convolve_periodic_sampled(&a, &w);
        let parts: Vec<PhaseSpaceFunction> = self
            .spectrum
            .par_iter()
            .zip(&self.eigenstates)
            .filter(|(l, _)| **l > cutoff)
            .map(|(l, s)| cross_wigner_unchecked(s, s).map(|v| v * *l))
            .collect();
        let mut sum = PhaseSpaceFunction::zeros(&grid);
        for p in parts {
            for (t, v) in sum.data.iter_mut().zip(p.data) {
                *t += v;
            }
        }
        Ok(sum.max_abs_diff(&smoothed))
    }

    pub fn purity(&self) -> f64 {
        self.spectrum.iter().map(|l| l * l).sum()
    }
}

/// Fixed phase-space grid on which sweep deviations are measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub half_width: f64,
    pub points: usize,
    pub quadrature_order: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self { half_width: PI, points: 65, quadrature_order: 40 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub hbar: f64,
    pub deviation: f64,
    pub ratio: f64,
}

/// Gauss–Hermite nodes and weights for the weight e^{−t²} (Golub–Welsch).
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    let j = Mat::from_fn(order, order, |r, c| {
        if r + 1 == c || c + 1 == r {
            (r.max(c) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|k| (eig.eigenvalues[k], PI.sqrt() * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// (a ∗ Wψ_XY)(z) = E[a(z − U)] with U ~ N(0, (ħ/2)G⁻¹), by tensor Gauss–Hermite quadrature.
pub fn smoothed_value_gaussian(a: &Symbol, psi: &GaussianState, z: [f64; 2], order: usize) -> Result<Complex64> {
    let cov = psi.wigner_closed_form().covariance();
    let l = cov.cholesky().ok_or_else(|| Error::NumericalDegeneracy("covariance not positive".into()))?.l();
    let (t, w) = gauss_hermite(order);
    let s2 = 2.0f64.sqrt();
    let mut acc = Complex64::new(0.0, 0.0);
    for (ti, wi) in t.iter().zip(&w) {
        for (tj, wj) in t.iter().zip(&w) {
            let (u0, u1) = (s2 * ti, s2 * tj);
            let ux = l[(0, 0)] * u0;
            let up = l[(1, 0)] * u0 + l[(1, 1)] * u1;
            acc += a.eval(z[0] - ux - psi.z0[0], z[1] - up - psi.z0[1])? * (wi * wj);
        }
    }
    Ok(acc / PI)
}

/// d(ħ) = max_z |a ∗ Wψ_XY − a| over the fixed sweep grid for each ħ.
pub fn semiclassical_sweep(a: &Symbol, x: f64, y: f64, hbars: &[f64], grid: &SweepGrid) -> Result<Vec<SweepPoint>> {
    if hbars.is_empty() || hbars.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
        return Err(Error::InvalidInput("hbar list must be nonempty and positive".into()));
    }
    if hbars.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("hbar list must be strictly decreasing".into()));
    }
    if grid.points < 2 || grid.quadrature_order == 0 {
        return Err(Error::InvalidInput("sweep grid needs at least two points and a quadrature order".into()));
    }
    let coords: Vec<f64> =
        (0..grid.points).map(|i| -grid.half_width + 2.0 * grid.half_width * i as f64 / (grid.points - 1) as f64).collect();
    hbars
        .iter()
        .map(|&h| {
            let psi = GaussianState::centered(Mat::from_element(1, 1, x), Mat::from_element(1, 1, y), h)?;
            let devs: Vec<f64> = coords
                .par_iter()
                .map(|&zx| {
                    coords.iter().try_fold(0.0f64, |m, &zp| {
                        let s = smoothed_value_gaussian(a, &psi, [zx, zp], grid.quadrature_order)?;
                        Ok(m.max((s - a.eval(zx, zp)?).norm()))
                    })
                })
                .collect::<Result<_>>()?;
            let deviation = devs.into_iter().fold(0.0f64, f64::max);
            Ok(SweepPoint { hbar: h, deviation, ratio: deviation / h })
        })
        .collect()
}
