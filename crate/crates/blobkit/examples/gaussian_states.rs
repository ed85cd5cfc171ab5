//! Generalized Gaussians ψ_XY: the blob correspondence, metaplectic generators, the
//! canonical flow of H_XY and the grid eigenvalue equation.

use blobkit::gaussian_states::{
    apply_generator, canonical_flow, from_blob, hamiltonian_xy_grid, to_blob, GaussianState, Generator,
};
use blobkit::linalg::Mat;
use blobkit::phasespace::SampleGrid;
use blobkit::symplectic::random_symplectic;
use blobkit::blobs::QuantumBlob;
use nalgebra::DVector;

fn main() -> blobkit::Result<()> {
    let hbar = 1.0;
    let q = QuantumBlob::new(random_symplectic(1, 3, 6)?, vec![0.5, -1.0], hbar)?;
    let psi = from_blob(&q)?;
    println!("blob -> Gaussian: X = {:.4}, Y = {:.4}", psi.x[(0, 0)], psi.y[(0, 0)]);
    println!("roundtrip gives the same blob: {}", to_blob(&psi)?.same_as(&q, 1e-9)?);

    let sheared = apply_generator(&psi, &Generator::Shear(Mat::from_element(1, 1, 0.7)))?;
    let image = Generator::Shear(Mat::from_element(1, 1, 0.7)).act_on_blob(&q)?;
    println!("V_P ψ matches the sheared blob: {}", to_blob(&sheared)?.same_as(&image, 1e-9)?);

    let (x, y) = (1.6, 0.4);
    let st = canonical_flow(&Mat::from_element(1, 1, x), &Mat::from_element(1, 1, y), 0.3, hbar)?;
    println!("S_t at t = 0.3: {:.4}", st.matrix());

    let grid = SampleGrid::default_for(hbar)?;
    let samples = GaussianState::centered(Mat::from_element(1, 1, x), Mat::from_element(1, 1, y), hbar)?.sample(grid)?;
    let v = DVector::from_vec(samples.values.clone());
    let hv = hamiltonian_xy_grid(x, y, &grid) * &v;
    let res = (hv - &v * nalgebra::Complex::new(hbar * x / 2.0, 0.0)).norm() / v.norm();
    println!("|H ψ - (ħ/2)Tr(X) ψ| / |ψ| = {res:.2e}");
    Ok(())
}
