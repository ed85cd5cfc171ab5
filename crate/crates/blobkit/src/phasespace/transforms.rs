use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::fft::{centered_dft, fft_in_place, half_shift};
use super::grid::{PhaseSpaceFunction, SampleGrid, SampledState};
use crate::error::{Error, Result};

/// Samples beyond this magnitude (relative to the peak) in the outer band count as leakage.
pub const EDGE_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn check_support(psi: &SampledState) -> Result<()> {
    let peak = psi.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let edge = psi.edge_magnitude();
    if edge > EDGE_TOL * peak.max(1e-300) {
        return Err(Error::Support(format!(
            "state reaches the grid edge (edge/peak = {:.3e})",
            edge / peak
        )));
    }
    Ok(())
}

fn sign(m: isize) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// W(ψ,φ)(x,p) = (2πħ)⁻¹∫e^{−ipy/ħ}ψ(x+y/2)conj φ(x−y/2)dy.
///
/// The y-integral runs over y = m·dx; odd m need samples half-way between grid points,
/// which come from band-limited half shifts of ψ and φ.
pub fn cross_wigner(psi: &SampledState, phi: &SampledState) -> Result<PhaseSpaceFunction> {
    psi.grid.require_same(&phi.grid)?;
    check_support(psi)?;
    check_support(phi)?;
    Ok(cross_wigner_unchecked(psi, phi))
}

pub fn wigner(psi: &SampledState) -> Result<PhaseSpaceFunction> {
    cross_wigner(psi, psi)
}

pub fn cross_wigner_unchecked(psi: &SampledState, phi: &SampledState) -> PhaseSpaceFunction {
    let grid = psi.grid;
    let n = grid.n as isize;
    let a = &psi.values;
    let b = &phi.values;
    let ah = half_shift(a);
    let bh = half_shift(b);
    let mut out = PhaseSpaceFunction::zeros(&grid);
    let scale = grid.dx / (2.0 * PI * grid.hbar);
    let np = out.np;
    out.data.par_chunks_mut(np).enumerate().for_each(|(i, row)| {
        let i = i as isize;
        for m in -n..n {
            let (ja, jb, even) = if m % 2 == 0 {
                (i + m / 2, i - m / 2, true)
            } else {
                let s = m.div_euclid(2);
                (i + s, i - s - 1, false)
            };
            if ja < 0 || jb < 0 || ja >= n || jb >= n {
                continue;
            }
            let term = if even {
                a[ja as usize] * b[jb as usize].conj()
            } else {
                ah[ja as usize] * bh[jb as usize].conj()
            };
            row[m.rem_euclid(n) as usize] += term * sign(m);
        }
        fft_in_place(row, false);
        for v in row.iter_mut() {
            *v *= scale;
        }
    });
    out
}

/// Amb(ψ,φ)(x,p) = (2πħ)⁻¹∫e^{−ipy/ħ}ψ(y+x/2)conj φ(y−x/2)dy, i.e. ½W(ψ,φ^∨)(z/2).
///
/// Requires a centered grid; x runs over the position grid and p over the momentum grid.
pub fn cross_ambiguity(psi: &SampledState, phi: &SampledState) -> Result<PhaseSpaceFunction> {
    psi.grid.require_same(&phi.grid)?;
    if !psi.grid.is_centered() {
        return Err(Error::InvalidInput("ambiguity function needs a centered grid".into()));
    }
    check_support(psi)?;
    check_support(phi)?;
    let grid = psi.grid;
    let n = grid.n as isize;
    let a = &psi.values;
    let b = &phi.values;
    let ah = half_shift(a);
    let bh = half_shift(b);
    let mut out = PhaseSpaceFunction::zeros(&grid);
    let scale = grid.dx / (2.0 * PI * grid.hbar);
    let np = out.np;
    out.data.par_chunks_mut(np).enumerate().for_each(|(i, row)| {
        let s = i as isize - n / 2;
        let r = s.div_euclid(2);
        let odd = s.rem_euclid(2) == 1;
        for j in 0..n {
            let (ja, jb) = if odd { (j + r, j - r - 1) } else { (j + r, j - r) };
            if ja < 0 || jb < 0 || ja >= n || jb >= n {
                continue;
            }
            row[j as usize] = if odd {
                ah[ja as usize] * bh[jb as usize].conj()
            } else {
                a[ja as usize] * b[jb as usize].conj()
            };
        }
        centered_dft(row, false);
        for v in row.iter_mut() {
            *v *= scale;
        }
    });
    Ok(out)
}

/// a_σ(z) = (2πħ)⁻¹∫e^{−iσ(z,z')/ħ}a(z')dz' with σ(z,z') = p·x' − x·p'.
pub fn symplectic_fourier(f: &PhaseSpaceFunction, hbar: f64) -> Result<PhaseSpaceFunction> {
    let n = f.nx;
    if f.np != n {
        return Err(Error::InvalidInput("symplectic Fourier transform needs Nx = Np".into()));
    }
    let centered = (f.x0 + (n / 2) as f64 * f.dx).abs() <= 1e-9 * f.dx
        && (f.p0 + (n / 2) as f64 * f.dp).abs() <= 1e-9 * f.dp;
    if !centered || (f.dx * f.dp * n as f64 - 2.0 * PI * hbar).abs() > 1e-9 * hbar {
        return Err(Error::InvalidInput("symplectic Fourier transform needs a centered grid with N dx dp = 2πħ".into()));
    }
    // columns: sum over x' with e^{−ipx'/ħ}
    let mut t = vec![ZERO; n * n];
    let cols: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|l| {
            let mut col: Vec<Complex64> = (0..n).map(|j| f.get(j, l)).collect();
            centered_dft(&mut col, false);
            col
        })
        .collect();
    for (l, col) in cols.iter().enumerate() {
        for (b, v) in col.iter().enumerate() {
            t[b * n + l] = *v;
        }
    }
    // rows: sum over p' with e^{+ixp'/ħ}
    let rows: Vec<Vec<Complex64>> = t
        .par_chunks(n)
        .map(|row| {
            let mut r = row.to_vec();
            centered_dft(&mut r, true);
            r
        })
        .collect();
    let scale = f.dx * f.dp / (2.0 * PI * hbar);
    let mut out = f.clone();
    for (b, row) in rows.iter().enumerate() {
        for (a, v) in row.iter().enumerate() {
            out.data[a * n + b] = v * scale;
        }
    }
    Ok(out)
}

/// 2-D FFT over a row-major n1 × n2 array.
pub fn fft2(data: &mut [Complex64], n1: usize, n2: usize, inverse: bool) {
    data.par_chunks_mut(n2).for_each(|row| fft_in_place(row, inverse));
    let mut cols: Vec<Vec<Complex64>> = (0..n2)
        .into_par_iter()
        .map(|c| {
            let mut col: Vec<Complex64> = (0..n1).map(|r| data[r * n2 + c]).collect();
            fft_in_place(&mut col, inverse);
            col
        })
        .collect();
    for (c, col) in cols.iter_mut().enumerate() {
        for (r, v) in col.iter().enumerate() {
            data[r * n2 + c] = *v;
        }
    }
}

/// Periodic convolution (a ∗ k)(z_i) = Σ_{i'} a(z_{i'}) k(z_i − z_{i'}) dx dp, where
/// `kernel(u, v)` is evaluated at lattice offsets u = d·dx, v = e·dp with d, e ∈ [−N/2, N/2).
pub fn convolve_periodic(a: &PhaseSpaceFunction, kernel: impl Fn(f64, f64) -> Complex64) -> PhaseSpaceFunction {
    let (nx, np) = (a.nx, a.np);
    let mut k = vec![ZERO; nx * np];
    for d in 0..nx {
        let u = super::fft::signed_freq(d, nx) * a.dx;
        for e in 0..np {
            let v = super::fft::signed_freq(e, np) * a.dp;
            k[d * np + e] = kernel(u, v);
        }
    }
    convolve_with_offsets(a, k)
}

/// Same as [`convolve_periodic`] with the kernel given on a centered product grid
/// (index N/2 ↔ offset 0).
pub fn convolve_periodic_sampled(a: &PhaseSpaceFunction, kernel: &PhaseSpaceFunction) -> PhaseSpaceFunction {
    let (nx, np) = (a.nx, a.np);
    assert!(kernel.nx == nx && kernel.np == np);
    let mut k = vec![ZERO; nx * np];
    for d in 0..nx {
        let src_i = (d + nx / 2) % nx;
        for e in 0..np {
            let src_k = (e + np / 2) % np;
            k[d * np + e] = kernel.get(src_i, src_k);
        }
    }
    convolve_with_offsets(a, k)
}

fn convolve_with_offsets(a: &PhaseSpaceFunction, mut k: Vec<Complex64>) -> PhaseSpaceFunction {
    let (nx, np) = (a.nx, a.np);
    let mut f = a.data.clone();
    fft2(&mut f, nx, np, false);
    fft2(&mut k, nx, np, false);
    for (x, y) in f.iter_mut().zip(&k) {
        *x *= y;
    }
    fft2(&mut f, nx, np, true);
    let scale = a.dx * a.dp / (nx * np) as f64;
    PhaseSpaceFunction { data: f.into_iter().map(|v| v * scale).collect(), ..a.clone() }
}

/// Husimi function Wψ ∗ Wφ₀ with Wφ₀(z) = (πħ)⁻¹e^{−|z|²/ħ}.
pub fn husimi(psi: &SampledState) -> Result<PhaseSpaceFunction> {
    let w = wigner(psi)?;
    let h = psi.grid.hbar;
    let c = 1.0 / (PI * h);
    Ok(convolve_periodic(&w, |u, v| Complex64::new(c * (-(u * u + v * v) / h).exp(), 0.0)))
}

/// Window-φ estimate of the Feichtinger norm: ‖W(ψ,φ)‖_{L¹}.
pub fn s0_norm(psi: &SampledState, phi: &SampledState) -> Result<f64> {
    for s in [psi, phi] {
        let mass = s.edge_mass();
        if mass > 1e-8 {
            return Err(Error::Support(format!("edge mass {mass:.3e} exceeds 1e-8")));
        }
    }
    psi.grid.require_same(&phi.grid)?;
    Ok(cross_wigner_unchecked(psi, phi).l1_norm())
}

/// Coherent state T̂(z₀)φ₀ sampled on the grid.
pub fn coherent_state(grid: SampleGrid, x0: f64, p0: f64) -> SampledState {
    let h = grid.hbar;
    SampledState::from_fn(grid, |x| {
        let amp = (PI * h).powf(-0.25) * (-(x - x0).powi(2) / (2.0 * h)).exp();
        Complex64::from_polar(amp, (p0 * x - p0 * x0 / 2.0) / h)
    })
}
