//! Gaussian Weyl–Heisenberg frames: the density threshold, and expansion with the
//! canonical dual below it.

use blobkit::gabor::{covering_radius, Lattice, WHSystem};
use blobkit::phasespace::{coherent_state, SampleGrid, SampledState};

fn main() -> blobkit::Result<()> {
    let hbar = 1.0;
    let grid = SampleGrid::symmetric(256, hbar)?;
    let rho = covering_radius(&grid) + 2.0;
    println!("density   a/b");
    for d in [0.5, 0.8, 1.0, 1.25, 2.0] {
        let sys = WHSystem::new(SampledState::standard_gaussian(grid), Lattice::square_with_density(d, hbar, rho)?)?;
        println!("{d:7.2}   {:.3e}", sys.frame_bounds()?.ratio());
    }

    let sys = WHSystem::new(SampledState::standard_gaussian(grid), Lattice::separable(1.0, 3.0, rho)?)?;
    let b = sys.frame_bounds()?;
    println!("alpha = 1, beta = 3: A = {:.4}, B = {:.4}, {} sites", b.a, b.b, sys.sites().len());
    let psi = coherent_state(grid, 1.3, -0.7);
    let ex = sys.expand(&psi)?;
    println!("reconstruction error {:.2e}", ex.relative_error);
    println!("coefficients vs 2πħ·ambiguity: {:.2e}", ex.ambiguity_gap);
    Ok(())
}
