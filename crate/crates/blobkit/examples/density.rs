//! Density matrices from phase-space probability densities: a thermal μ and a mixture of
//! two narrow bumps.

use std::f64::consts::PI;

use blobkit::gaussian_states::GaussianState;
use blobkit::phasespace::{PhaseSpaceFunction, SampleGrid, SampledState};
use blobkit::toeplitz::{density_matrix, Window};
use blobkit::weyl::{GaussianBump, Symbol};

fn main() -> blobkit::Result<()> {
    let hbar = 1.0;
    let grid = SampleGrid::symmetric(128, hbar)?;
    let phi = || GaussianState::standard(1, hbar).map(Window::Gaussian);

    let thermal = Symbol::gaussian(vec![GaussianBump::isotropic(1.0 / (PI * hbar), [0.0, 0.0], hbar.sqrt())]);
    let rho = density_matrix(&thermal, phi()?, &grid)?;
    let tc = rho.trace_checks(&thermal, &SampledState::standard_gaussian(grid))?;
    println!("thermal: trace {:.8} / {:.8} / {:.8}", tc.matrix_trace, tc.smoothed_integral, tc.fourier_product);
    println!("  spectrum {:.6?}", &rho.spectrum[..4]);
    println!("  purity {:.6}", rho.purity());

    let raw = PhaseSpaceFunction::from_real_fn(&grid, |x, p| {
        (-((x - 1.5).powi(2) + p * p) / 0.02).exp() + (-((x + 1.5).powi(2) + p * p) / 0.02).exp()
    });
    let total = raw.integral().re;
    let mu = Symbol::sampled(raw.map(|v| v / total));
    let rho = density_matrix(&mu, phi()?, &grid)?;
    println!("two bumps: top eigenvalues {:.4?}, min {:.1e}", &rho.spectrum[..3], rho.min_eigenvalue);
    Ok(())
}
