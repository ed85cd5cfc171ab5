//! Wigner, Husimi and ambiguity functions of a squeezed state on the default grid,
//! with the Moyal identity and a CSV export for plotting.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;

use blobkit::gaussian_states::GaussianState;
use blobkit::linalg::Mat;
use blobkit::phasespace::io::write_csv;
use blobkit::phasespace::{coherent_state, cross_ambiguity, husimi, wigner, SampleGrid};

fn main() -> blobkit::Result<()> {
    let hbar = 1.0;
    let grid = SampleGrid::default_for(hbar)?;
    let state = GaussianState::new(Mat::from_element(1, 1, 2.0), Mat::from_element(1, 1, 0.5), vec![1.0, -0.5], hbar)?;
    let psi = state.sample(grid)?;
    let w = wigner(&psi)?;
    let closed = state.wigner_closed_form();
    let mut err = 0.0f64;
    for i in 0..w.nx {
        for k in 0..w.np {
            err = err.max((w.get(i, k).re - closed.value(&[w.x(i), w.p(k)])).abs());
        }
    }
    println!("max |W_grid - W_exact| = {err:.2e}");
    println!("∫W = {:.12}", w.integral().re);

    let h = husimi(&psi)?;
    println!("Husimi min = {:.2e} (nonnegative), ∫ = {:.12}", h.min_real(), h.integral().re);

    let phi = coherent_state(grid, 0.0, 0.0);
    let lhs = w.inner(&wigner(&phi)?).re;
    let rhs = psi.inner(&phi).norm_sqr() / (2.0 * PI * hbar);
    println!("Moyal: ∫WψWφ = {lhs:.12}, |(ψ|φ)|²/2πħ = {rhs:.12}");

    let amb = cross_ambiguity(&psi, &psi)?;
    println!("ambiguity peak |A(0)| = {:.12}", amb.max_abs());

    let path = std::env::temp_dir().join("blobkit_wigner.csv");
    write_csv(&w, BufWriter::new(File::create(&path)?))?;
    println!("wrote {}", path.display());
    Ok(())
}
