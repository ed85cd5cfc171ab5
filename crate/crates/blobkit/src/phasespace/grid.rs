use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid x_j = x0 + j·dx, j = 0..N, with momentum grid p_k = (k − N/2)·dp,
/// dp = 2πħ/(N·dx).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub n: usize,
    pub dx: f64,
    pub x0: f64,
    pub hbar: f64,
}

impl SampleGrid {
    pub fn new(n: usize, dx: f64, x0: f64, hbar: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!("grid size must be a power of two >= 4, got {n}")));
        }
        if !(dx > 0.0 && dx.is_finite()) || !(hbar > 0.0 && hbar.is_finite()) || !x0.is_finite() {
            return Err(Error::InvalidInput("grid spacing and hbar must be positive".into()));
        }
        Ok(Self { n, dx, x0, hbar })
    }

    /// N points on [−half_width, half_width).
    pub fn centered(n: usize, half_width: f64, hbar: f64) -> Result<Self> {
        Self::new(n, 2.0 * half_width / n as f64, -half_width, hbar)
    }

    /// N = 512 on [−12√ħ, 12√ħ).
    pub fn default_for(hbar: f64) -> Result<Self> {
        Self::centered(512, 12.0 * hbar.sqrt(), hbar)
    }

    /// Centered grid with dx = dp = √(2πħ/N), so position and momentum grids coincide.
    pub fn symmetric(n: usize, hbar: f64) -> Result<Self> {
        let dx = (2.0 * PI * hbar / n as f64).sqrt();
        Self::new(n, dx, -(n as f64 / 2.0) * dx, hbar)
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI * self.hbar / (self.n as f64 * self.dx)
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    pub fn p(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.dp()
    }

    pub fn p0(&self) -> f64 {
        self.p(0)
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.p(k)).collect()
    }

    pub fn length(&self) -> f64 {
        self.n as f64 * self.dx
    }

    pub fn p_max(&self) -> f64 {
        (self.n / 2) as f64 * self.dp()
    }

    /// True when the grid is centered (x_{N/2} = 0).
    pub fn is_centered(&self) -> bool {
        self.x(self.n / 2).abs() <= 1e-12 * self.dx
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_centered() && (self.dx - self.dp()).abs() <= 1e-12 * self.dx
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n == other.n
            && (self.dx - other.dx).abs() <= 1e-14 * self.dx
            && (self.x0 - other.x0).abs() <= 1e-12 * self.dx.max(1.0)
            && (self.hbar - other.hbar).abs() <= 1e-14 * self.hbar
    }

    pub fn require_same(&self, other: &Self) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::InvalidInput("states live on different grids".into()))
        }
    }

    /// Index of the grid point closest to x.
    pub fn index_of(&self, x: f64) -> isize {
        ((x - self.x0) / self.dx).round() as isize
    }
}

/// Complex samples ψ(x_j) of a wavefunction.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledState {
    pub grid: SampleGrid,
    pub values: Vec<Complex64>,
}

impl SampledState {
    pub fn new(grid: SampleGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidDimension(format!(
                "expected {} samples, got {}",
                grid.n,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: SampleGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n).map(|j| f(grid.x(j))).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: SampleGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Standard coherent state φ₀(x) = (πħ)^{−1/4} e^{−x²/2ħ}.
    pub fn standard_gaussian(grid: SampleGrid) -> Self {
        let h = grid.hbar;
        Self::from_real_fn(grid, |x| (PI * h).powf(-0.25) * (-x * x / (2.0 * h)).exp())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// (ψ|φ) = Σ ψ_j conj(φ_j) dx.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum::<Complex64>() * self.grid.dx
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::InvalidInput("cannot normalize the zero state".into()));
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            * self.grid.dx.sqrt()
    }

    /// Reflection ψ^∨(x) = ψ(−x) on a centered grid; the unpaired first sample maps to zero.
    pub fn reflected(&self) -> Self {
        let n = self.grid.n;
        let values = (0..n).map(|j| if j == 0 { Complex64::new(0.0, 0.0) } else { self.values[n - j] }).collect();
        Self { grid: self.grid, values }
    }

    /// Largest |ψ| over the outermost 2% of grid points on each side.
    pub fn edge_magnitude(&self) -> f64 {
        let band = (self.grid.n / 50).max(1);
        self.values[..band]
            .iter()
            .chain(&self.values[self.grid.n - band..])
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Fraction of ‖ψ‖² within the outermost 5% of the domain on each side.
    pub fn edge_mass(&self) -> f64 {
        let band = (self.grid.n / 20).max(1);
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        let edge: f64 = self.values[..band]
            .iter()
            .chain(&self.values[self.grid.n - band..])
            .map(|v| v.norm_sqr())
            .sum();
        if total == 0.0 {
            0.0
        } else {
            edge / total
        }
    }

    /// Momentum representation ψ̂(p_k) = (2πħ)^{−1/2} Σ_j e^{−ip_k x_j/ħ} ψ_j dx on a centered grid.
    pub fn momentum_amplitudes(&self) -> Vec<Complex64> {
        let mut v = self.values.clone();
        super::fft::centered_dft(&mut v, false);
        let c = self.grid.dx / (2.0 * PI * self.grid.hbar).sqrt();
        v.iter().map(|x| x * c).collect()
    }
}

/// Samples F(x_i, p_k) on the product grid, stored row-major with x as the slow index.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceFunction {
    pub nx: usize,
    pub np: usize,
    pub x0: f64,
    pub dx: f64,
    pub p0: f64,
    pub dp: f64,
    pub data: Vec<Complex64>,
}

impl PhaseSpaceFunction {
    pub fn zeros(grid: &SampleGrid) -> Self {
        Self {
            nx: grid.n,
            np: grid.n,
            x0: grid.x0,
            dx: grid.dx,
            p0: grid.p0(),
            dp: grid.dp(),
            data: vec![Complex64::new(0.0, 0.0); grid.n * grid.n],
        }
    }

    pub fn from_fn(grid: &SampleGrid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..out.nx {
            let x = out.x(i);
            for k in 0..out.np {
                out.data[i * out.np + k] = f(x, out.p(k));
            }
        }
        out
    }

    pub fn from_real_fn(grid: &SampleGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(grid, |x, p| Complex64::new(f(x, p), 0.0))
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn p(&self, k: usize) -> f64 {
        self.p0 + k as f64 * self.dp
    }

    pub fn get(&self, i: usize, k: usize) -> Complex64 {
        self.data[i * self.np + k]
    }

    pub fn set(&mut self, i: usize, k: usize, v: Complex64) {
        self.data[i * self.np + k] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.np..(i + 1) * self.np]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.nx == other.nx
            && self.np == other.np
            && (self.dx - other.dx).abs() <= 1e-14 * self.dx
            && (self.dp - other.dp).abs() <= 1e-14 * self.dp
    }

    pub fn cell(&self) -> f64 {
        self.dx * self.dp
    }

    pub fn integral(&self) -> Complex64 {
        self.data.iter().sum::<Complex64>() * self.cell()
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).sum::<f64>() * self.cell()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell()).sqrt()
    }

    /// ⟨F, G⟩ = Σ F conj(G) dx dp.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b.conj()).sum::<Complex64>() * self.cell()
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    pub fn min_real(&self) -> f64 {
        self.data.iter().fold(f64::INFINITY, |m, v| m.min(v.re))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { data: self.data.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// ∫F dp as a function of x.
    pub fn x_marginal(&self) -> Vec<Complex64> {
        (0..self.nx).map(|i| self.row(i).iter().sum::<Complex64>() * self.dp).collect()
    }

    /// ∫F dx as a function of p.
    pub fn p_marginal(&self) -> Vec<Complex64> {
        (0..self.np)
            .map(|k| (0..self.nx).map(|i| self.get(i, k)).sum::<Complex64>() * self.dx)
            .collect()
    }
}
