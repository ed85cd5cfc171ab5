//! FFT helpers for the centered grid convention x_j = (j − N/2)dx, p_k = (k − N/2)dp.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized FFT in standard ordering, sign e^{−2πi kj/N} (forward) or e^{+2πi kj/N}.
pub fn fft_in_place(v: &mut [Complex64], inverse: bool) {
    let n = v.len();
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let plan = if inverse { p.plan_fft_inverse(n) } else { p.plan_fft_forward(n) };
        plan.process(v);
    });
}

fn sign(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// F_k = Σ_j e^{∓2πi(k−N/2)(j−N/2)/N} v_j for even N.
pub fn centered_dft(v: &mut [Complex64], inverse: bool) {
    let n = v.len();
    assert!(n % 2 == 0, "centered DFT needs an even length");
    let global = sign(n / 2);
    for (j, x) in v.iter_mut().enumerate() {
        *x *= sign(j);
    }
    fft_in_place(v, inverse);
    for (k, x) in v.iter_mut().enumerate() {
        *x *= sign(k) * global;
    }
}

/// Signed frequency index of FFT bin k: k for k < N/2, k − N otherwise.
pub fn signed_freq(k: usize, n: usize) -> f64 {
    if k < n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Band-limited periodic shift v(x) ↦ v(x − h), h measured in grid spacings.
pub fn fourier_shift(v: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = v.len();
    let mut w = v.to_vec();
    fft_in_place(&mut w, false);
    let scale = 1.0 / n as f64;
    for (k, x) in w.iter_mut().enumerate() {
        let theta = -2.0 * PI * signed_freq(k, n) * h / n as f64;
        *x *= Complex64::from_polar(scale, theta);
    }
    fft_in_place(&mut w, true);
    w
}

/// v(x + dx/2) by band-limited interpolation.
pub fn half_shift(v: &[Complex64]) -> Vec<Complex64> {
    fourier_shift(v, -0.5)
}

/// Lagrange weights for the value half-way between node 0 and node 1, using nodes −r+1..=r.
pub fn half_point_weights(r: usize) -> Vec<(isize, f64)> {
    let nodes: Vec<isize> = (-(r as isize) + 1..=r as isize).collect();
    nodes
        .iter()
        .map(|&j| {
            let w = nodes
                .iter()
                .filter(|&&o| o != j)
                .map(|&o| (0.5 - o as f64) / (j - o) as f64)
                .product();
            (j, w)
        })
        .collect()
}
