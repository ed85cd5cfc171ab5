use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::operator::DiscretizedOperator;
use super::symbol::Symbol;
use crate::error::Result;
use crate::linalg::CMat;
use crate::phasespace::fft::{fft_in_place, half_point_weights};
use crate::phasespace::{PhaseSpaceFunction, SampleGrid};

/// Half-width of the Lagrange stencil used for kernel values between grid points.
pub const HALF_STENCIL: usize = 8;

fn sign(m: isize) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Minimal-image separation j − l in [−N/2, N/2).
fn wrap(d: isize, n: isize) -> isize {
    (d + n / 2).rem_euclid(n) - n / 2
}

/// K(x,y) = (2πħ)⁻¹∫e^{ip(x−y)/ħ}a((x+y)/2, p)dp, discretized.
///
/// Separations are taken as minimal images on the periodic grid and midpoints are wrapped
/// into the domain. Entries at separation exactly N/2 average the two images.
pub fn weyl_quantize(a: &Symbol, grid: &SampleGrid) -> Result<DiscretizedOperator> {
    let n = grid.n;
    let ni = n as isize;
    let rows = a.midpoint_rows(grid)?;
    let dp = grid.dp();
    // f[t][m mod N] = Σ_k e^{ip_k m dx/ħ} a(x̄_t, p_k) dp
    let f: Vec<Vec<Complex64>> = rows
        .into_par_iter()
        .map(|mut row| {
            fft_in_place(&mut row, true);
            for (m, v) in row.iter_mut().enumerate() {
                *v *= sign(m as isize) * dp;
            }
            row
        })
        .collect();
    let scale = grid.dx / (2.0 * PI * grid.hbar);
    let lookup = |l: isize, m: isize| -> Complex64 {
        let t = (2 * l + m).rem_euclid(2 * ni) as usize;
        f[t][m.rem_euclid(ni) as usize]
    };
    let mut mat = CMat::zeros(n, n);
    for j in 0..ni {
        for l in 0..ni {
            let m = wrap(j - l, ni);
            let v = if m == -ni / 2 {
                (lookup(l, m) + lookup(l, -m)) * 0.5
            } else {
                lookup(l, m)
            };
            mat[(j as usize, l as usize)] = v * scale;
        }
    }
    DiscretizedOperator::new(*grid, mat, format!("weyl({a:?})"))
}

/// Kernel entries shifted half a step along each diagonal: M(x_j + dx/2, x_l + dx/2).
fn diagonal_half_shift(m: &CMat) -> CMat {
    let n = m.nrows();
    let w = half_point_weights(HALF_STENCIL);
    let mut out = CMat::zeros(n, n);
    for d in 0..n {
        let diag: Vec<Complex64> = (0..n).map(|c| m[((c + d) % n, c)]).collect();
        for c in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(r, wr) in &w {
                acc += diag[(c as isize + r).rem_euclid(n as isize) as usize] * wr;
            }
            out[((c + d) % n, c)] = acc;
        }
    }
    out
}

/// a(x,p) = ∫e^{−ipy/ħ}K(x+y/2, x−y/2)dy, discretized with y = m·dx, |m| ≤ N/2
/// (end points weighted ½).
pub fn weyl_symbol(op: &DiscretizedOperator) -> PhaseSpaceFunction {
    let grid = op.grid;
    let n = grid.n;
    let ni = n as isize;
    let m = &op.matrix;
    let mh = diagonal_half_shift(m);
    let mut out = PhaseSpaceFunction::zeros(&grid);
    out.data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let i = i as isize;
        for s in -ni / 2..=ni / 2 {
            let w = if s.abs() == ni / 2 { 0.5 } else { 1.0 };
            let v = if s % 2 == 0 {
                m[((i + s / 2).rem_euclid(ni) as usize, (i - s / 2).rem_euclid(ni) as usize)]
            } else {
                let h = s.div_euclid(2);
                mh[((i + h).rem_euclid(ni) as usize, (i - h - 1).rem_euclid(ni) as usize)]
            };
            row[s.rem_euclid(ni) as usize] += v * (w * sign(s));
        }
        fft_in_place(row, false);
    });
    out
}

/// (a ⋆ b) = weyl_symbol(Op(a)·Op(b)).
pub fn moyal_star(a: &Symbol, b: &Symbol, grid: &SampleGrid) -> Result<PhaseSpaceFunction> {
    let qa = weyl_quantize(a, grid)?;
    let qb = weyl_quantize(b, grid)?;
    Ok(weyl_symbol(&qa.compose(&qb)))
}
