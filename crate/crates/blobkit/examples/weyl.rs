//! Weyl quantization on the grid: the harmonic oscillator spectrum, the Moyal commutator
//! and metaplectic covariance Ŝ Op(a∘S) Ŝ⁻¹ = Op(a).

use blobkit::phasespace::{PhaseSpaceFunction, SampleGrid};
use blobkit::weyl::{metaplectic_matrix, moyal_star, plateau, weyl_quantize, GaussianBump, MetaplecticGenerator, Symbol};

fn main() -> blobkit::Result<()> {
    let hbar = 1.0;
    let grid = SampleGrid::default_for(hbar)?;
    let eig = weyl_quantize(&Symbol::harmonic_oscillator(), &grid)?.hermitian_eigenvalues();
    for (k, e) in eig.iter().take(6).enumerate() {
        println!("E_{k} = {e:.10}  (exact {})", hbar * (k as f64 + 0.5));
    }

    let x = Symbol::from_real_fn(|x, p| x * plateau(x, 6.0, 1.0) * plateau(p, 6.0, 1.0));
    let p = Symbol::from_real_fn(|x, p| p * plateau(x, 6.0, 1.0) * plateau(p, 6.0, 1.0));
    let xp = moyal_star(&x, &p, &grid)?;
    let px = moyal_star(&p, &x, &grid)?;
    let comm = PhaseSpaceFunction { data: xp.data.iter().zip(&px.data).map(|(a, b)| a - b).collect(), ..xp.clone() };
    let mut dev = 0.0f64;
    for i in 0..comm.nx {
        for k in 0..comm.np {
            if comm.x(i).abs() <= 2.0 && comm.p(k).abs() <= 2.0 {
                dev = dev.max((comm.get(i, k) - num_complex::Complex64::new(0.0, hbar)).norm());
            }
        }
    }
    println!("max |x⋆p - p⋆x - iħ| on |x|,|p| ≤ 2: {dev:.2e}");

    let sym = SampleGrid::symmetric(256, hbar)?;
    let a = Symbol::gaussian(vec![GaussianBump { amplitude: 1.0, center: [0.5, -0.3], matrix: [[0.8, 0.2], [0.2, 0.5]] }]);
    for g in [MetaplecticGenerator::J, MetaplecticGenerator::Shear(0.6), MetaplecticGenerator::Dilation(1.3)] {
        let s = metaplectic_matrix(&g, &sym)?;
        let sinv = metaplectic_matrix(&g.inverse(), &sym)?;
        let lhs = s.compose(&weyl_quantize(&a.compose_linear(g.symplectic())?, &sym)?).compose(&sinv);
        println!("{g:?}: covariance residual {:.2e}", lhs.max_abs_diff(&weyl_quantize(&a, &sym)?));
    }
    Ok(())
}
