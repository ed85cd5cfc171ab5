//! Robertson–Schrödinger uncertainty: the PSD test, Williamson eigenvalues and the
//! symplectic capacity of the covariance ellipsoid, on a few covariance matrices.

use blobkit::blobs::{uncertainty_report, CovarianceMatrix};
use blobkit::linalg::Mat;

fn main() -> blobkit::Result<()> {
    let hbar = 1.0;
    let cases = [
        ("vacuum (ħ/2)I", Mat::identity(2, 2) * 0.5),
        ("too sharp (ħ/4)I", Mat::identity(2, 2) * 0.25),
        ("squeezed", Mat::from_row_slice(2, 2, &[0.125, 0.0, 0.0, 2.0])),
        ("correlated", Mat::from_row_slice(2, 2, &[1.0, 0.8, 0.8, 1.0])),
    ];
    for (name, sigma) in cases {
        let r = uncertainty_report(&CovarianceMatrix::new(sigma)?, hbar)?;
        println!(
            "{name:18} RS2 {:5}  λ_min {:.4}  capacity/πħ {:.4}  saturated {}",
            r.rs2_holds,
            r.symplectic_spectrum.min(),
            r.capacity / (std::f64::consts::PI * hbar),
            r.saturated
        );
    }

    // Every per-mode Robertson–Schrödinger inequality holds, but the full condition fails.
    let mut sigma = Mat::identity(4, 4);
    sigma[(0, 3)] = 0.9;
    sigma[(3, 0)] = 0.9;
    sigma[(1, 2)] = 0.9;
    sigma[(2, 1)] = 0.9;
    let r = uncertainty_report(&CovarianceMatrix::new(sigma)?, hbar)?;
    println!("cross-correlated n=2: RS1 per mode {:?}, RS2 {}", r.rs1_holds_per_j, r.rs2_holds);
    Ok(())
}
