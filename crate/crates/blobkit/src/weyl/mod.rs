//! Discretized Weyl calculus on a 1-D grid.

mod operator;
mod quantize;
mod symbol;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use operator::DiscretizedOperator;
pub use quantize::{moyal_star, weyl_quantize, weyl_symbol, HALF_STENCIL};
pub use symbol::{plateau, GaussianBump, Monomial, Symbol, SymbolSamples};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::phasespace::fft::fourier_shift;
use crate::phasespace::{SampleGrid, SampledState};

fn lattice_steps(v: f64, step: f64) -> Option<isize> {
    let r = v / step;
    let k = r.round();
    if (r - k).abs() <= 1e-9 {
        Some(k as isize)
    } else {
        None
    }
}

/// ψ(x − x₀) with periodic wrap: an exact cyclic shift on lattice-aligned x₀, a
/// band-limited Fourier shift otherwise.
pub fn shift_samples(values: &[Complex64], x0: f64, dx: f64) -> Vec<Complex64> {
    let n = values.len() as isize;
    match lattice_steps(x0, dx) {
        Some(s) => (0..n).map(|j| values[(j - s).rem_euclid(n) as usize]).collect(),
        None => fourier_shift(values, x0 / dx),
    }
}

/// T̂(z₀)ψ(x) = e^{i(p₀x − p₀x₀/2)/ħ}ψ(x − x₀).
pub fn heisenberg_apply(psi: &SampledState, z0: [f64; 2]) -> SampledState {
    let g = psi.grid;
    let shifted = shift_samples(&psi.values, z0[0], g.dx);
    let values = shifted
        .into_iter()
        .enumerate()
        .map(|(j, v)| v * Complex64::from_polar(1.0, (z0[1] * g.x(j) - z0[1] * z0[0] / 2.0) / g.hbar))
        .collect();
    SampledState { grid: g, values }
}

pub fn heisenberg_matrix(z0: [f64; 2], grid: &SampleGrid) -> DiscretizedOperator {
    let n = grid.n;
    let mut m = CMat::zeros(n, n);
    for c in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[c] = Complex64::new(1.0, 0.0);
        let col = heisenberg_apply(&SampledState { grid: *grid, values: e }, z0);
        for (r, v) in col.values.into_iter().enumerate() {
            m[(r, c)] = v;
        }
    }
    DiscretizedOperator { grid: *grid, matrix: m, label: format!("T({}, {})", z0[0], z0[1]) }
}

/// T̂_GR(z₀)ψ(x) = e^{2ip₀(x−x₀)/ħ}ψ(2x₀ − x); x₀ must lie on the half-lattice.
pub fn grossmann_royer_matrix(z0: [f64; 2], grid: &SampleGrid) -> Result<DiscretizedOperator> {
    let n = grid.n as isize;
    let twice = lattice_steps(2.0 * (z0[0] - grid.x0), grid.dx)
        .ok_or_else(|| Error::InvalidInput("x0 must be a multiple of dx/2 from the grid origin".into()))?;
    let mut m = CMat::zeros(grid.n, grid.n);
    for j in 0..n {
        let src = (twice - j).rem_euclid(n) as usize;
        let x = grid.x(j as usize);
        m[(j as usize, src)] = Complex64::from_polar(1.0, 2.0 * z0[1] * (x - z0[0]) / grid.hbar);
    }
    Ok(DiscretizedOperator { grid: *grid, matrix: m, label: format!("T_GR({}, {})", z0[0], z0[1]) })
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetaplecticGenerator {
    J,
    /// Ĵ⁻¹ = Ĵ*, covering −J.
    JInverse,
    Shear(f64),
    Dilation(f64),
}

impl MetaplecticGenerator {
    /// The 2×2 symplectic matrix covered by the generator.
    pub fn symplectic(&self) -> [[f64; 2]; 2] {
        match *self {
            MetaplecticGenerator::J => [[0.0, 1.0], [-1.0, 0.0]],
            MetaplecticGenerator::JInverse => [[0.0, -1.0], [1.0, 0.0]],
            MetaplecticGenerator::Shear(p) => [[1.0, 0.0], [-p, 1.0]],
            MetaplecticGenerator::Dilation(l) => [[1.0 / l, 0.0], [0.0, l]],
        }
    }

    pub fn inverse(&self) -> Self {
        match *self {
            MetaplecticGenerator::J => MetaplecticGenerator::JInverse,
            MetaplecticGenerator::JInverse => MetaplecticGenerator::J,
            MetaplecticGenerator::Shear(p) => MetaplecticGenerator::Shear(-p),
            MetaplecticGenerator::Dilation(l) => MetaplecticGenerator::Dilation(1.0 / l),
        }
    }
}

/// Periodic band-limited interpolation weight of sample offset v (in grid steps).
fn dirichlet(v: f64, n: usize) -> f64 {
    let nf = n as f64;
    let den = (PI * v / nf).sin();
    let main = if den.abs() < 1e-12 { nf - 1.0 } else { (PI * v * (nf - 1.0) / nf).sin() / den };
    (main + (PI * v).cos()) / nf
}

/// Grid matrices of Ĵ, V̂_P and M̂_L.
///
/// Ĵ needs a symmetric grid (dx = dp) and uses the principal branch (2πiħ)^{−1/2} = e^{−iπ/4}(2πħ)^{−1/2}.
/// M̂_Lψ = √|L|ψ(Lx) resamples by band-limited interpolation; points Lx outside the
/// domain are set to zero.
pub fn metaplectic_matrix(g: &MetaplecticGenerator, grid: &SampleGrid) -> Result<DiscretizedOperator> {
    let n = grid.n;
    let h = grid.hbar;
    let xs = grid.xs();
    let (matrix, label) = match *g {
        MetaplecticGenerator::J | MetaplecticGenerator::JInverse => {
            if !grid.is_symmetric() {
                return Err(Error::InvalidInput("J needs a symmetric grid (dx = dp)".into()));
            }
            let sgn = if *g == MetaplecticGenerator::J { 1.0 } else { -1.0 };
            let c = Complex64::from_polar((2.0 * PI * h).powf(-0.5) * grid.dx, -sgn * PI / 4.0);
            let label = if sgn > 0.0 { "J" } else { "J^-1" };
            (CMat::from_fn(n, n, |r, k| c * Complex64::from_polar(1.0, -sgn * xs[r] * xs[k] / h)), label.to_string())
        }
        MetaplecticGenerator::Shear(p) => (
            CMat::from_fn(n, n, |r, k| {
                if r == k {
                    Complex64::from_polar(1.0, -p * xs[r] * xs[r] / (2.0 * h))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
            format!("V({p})"),
        ),
        MetaplecticGenerator::Dilation(l) => {
            if !(l.is_finite() && l != 0.0) {
                return Err(Error::InvalidInput("M_L needs a nonzero L".into()));
            }
            let amp = l.abs().sqrt();
            let end = grid.x0 + grid.length();
            let m = CMat::from_fn(n, n, |r, k| {
                let u = l * xs[r];
                if u < grid.x0 - 1e-12 || u >= end {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::new(amp * dirichlet((u - xs[k]) / grid.dx, n), 0.0)
            });
            (m, format!("M({l})"))
        }
    };
    DiscretizedOperator::new(*grid, matrix, label)
}
