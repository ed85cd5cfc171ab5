//! Toeplitz (anti-Wick) operators: direct quadrature against the smoothed-Weyl route,
//! positivity, and blob operators with a squeezed window.

use blobkit::gaussian_states::GaussianState;
use blobkit::linalg::Mat;
use blobkit::phasespace::SampleGrid;
use blobkit::toeplitz::{blob_operator, toeplitz_quantize, toeplitz_via_weyl, ToeplitzSpec, Window};
use blobkit::weyl::{GaussianBump, Symbol};

fn main() -> blobkit::Result<()> {
    let hbar = 1.0;
    let grid = SampleGrid::symmetric(128, hbar)?;
    let a = Symbol::gaussian(vec![
        GaussianBump::isotropic(1.0, [1.0, 0.0], 0.8),
        GaussianBump::isotropic(0.5, [-1.0, 1.0], 0.6),
    ]);
    let window = GaussianState::new(Mat::from_element(1, 1, 2.0), Mat::from_element(1, 1, 0.3), vec![0.0, 0.0], hbar)?;
    let spec = ToeplitzSpec::new(a.clone(), Window::Gaussian(window), hbar)?;
    let direct = toeplitz_quantize(&spec, &grid)?;
    let via = toeplitz_via_weyl(&spec, &grid)?;
    println!("direct vs smoothed Weyl: {:.2e}", direct.max_abs_diff(&via));
    println!("lowest eigenvalue (a ≥ 0): {:.2e}", direct.hermitian_eigenvalues()[0]);

    let quad = Symbol::polynomial(&[(2, 0, 1.0), (0, 2, 1.0)]);
    let aw = toeplitz_quantize(&ToeplitzSpec::anti_wick(quad, hbar)?, &grid)?.hermitian_eigenvalues();
    println!("anti-Wick x²+p²: {:.6} {:.6} {:.6}", aw[0], aw[1], aw[2]);

    for (x, y) in [(1.0, 0.0), (2.0, 0.0), (1.0, 0.8)] {
        let op = blob_operator(a.clone(), x, y, &grid)?;
        let top = op.hermitian_eigenvalues();
        println!("blob X = {x}, Y = {y}: largest eigenvalue {:.6}", top[top.len() - 1]);
    }
    Ok(())
}
