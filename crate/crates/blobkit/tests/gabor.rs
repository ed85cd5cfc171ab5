use std::f64::consts::PI;

use blobkit::gabor::{ambiguity_at, Lattice, LatticeRecord, WHSystem};
use blobkit::gaussian_states::{s_xy, GaussianState};
use blobkit::linalg::{herm_eigenvalues, Mat};
use blobkit::phasespace::{coherent_state, SampleGrid, SampledState};
use blobkit::symplectic::SymplecticMatrix;
use blobkit::weyl::{heisenberg_apply, metaplectic_matrix, DiscretizedOperator, MetaplecticGenerator};
use blobkit::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RHO: f64 = 30.0;

fn grid() -> SampleGrid {
    SampleGrid::symmetric(256, 1.0).unwrap()
}

fn gauss_system(density: f64) -> WHSystem {
    let g = grid();
    WHSystem::new(SampledState::standard_gaussian(g), Lattice::square_with_density(density, 1.0, RHO).unwrap()).unwrap()
}

fn interior_compress(sys: &WHSystem, op: &DiscretizedOperator) -> blobkit::linalg::CMat {
    let q = sys.interior_basis().unwrap();
    q.adjoint() * &op.matrix * q
}

#[test]
fn lattice_enumeration() {
    let l = Lattice::separable(1.0, 2.0, 2.0).unwrap();
    let pts = l.points();
    assert_eq!(pts.len(), 7);
    assert_eq!(pts[0], vec![0.0, 0.0]);
    assert!(pts.windows(2).all(|w| w[0].iter().map(|v| v * v).sum::<f64>() <= w[1].iter().map(|v| v * v).sum::<f64>()));
    assert_eq!(pts, l.points());
    assert!(Lattice::new(Mat::zeros(2, 2), 1.0).is_err());

    let rec: LatticeRecord = serde_json::from_str(r#"{"alpha": 1.0, "beta": 3.0, "rho": 5}"#).unwrap();
    let l = Lattice::try_from(rec).unwrap();
    assert!((l.density(1.0) - 3.0 / (2.0 * PI)).abs() < 1e-15);
    let rec: LatticeRecord = serde_json::from_str(r#"{"rho": 5}"#).unwrap();
    assert!(Lattice::try_from(rec).is_err());
}

#[test]
fn empty_lattice_gives_zero_operator() {
    let g = SampleGrid::new(256, grid().dx, 5.0, 1.0).unwrap();
    let window = coherent_state(g, 25.0, 0.0);
    let sys = WHSystem::new(window, Lattice::separable(1.0, 1.0, 0.5).unwrap()).unwrap();
    assert!(sys.sites().is_empty());
    assert_eq!(sys.frame_operator().frobenius_norm(), 0.0);
    assert!(matches!(sys.frame_bounds(), Err(Error::Truncation(_))));
}

#[test]
fn threshold_sweep() {
    let ratios: Vec<f64> = [0.5, 0.8, 1.0, 1.25, 2.0].iter().map(|&d| gauss_system(d).frame_bounds().unwrap().ratio()).collect();
    assert!(ratios.windows(2).all(|w| w[1] <= w[0]), "{ratios:?}");
    assert!(ratios[0] > 0.1);
    assert!(ratios[4] <= 1e-3);
    assert!(ratios[3] <= ratios[1] / 100.0);
}

#[test]
fn near_tight_and_lattice_invariant() {
    let sys = gauss_system(0.5);
    let s = sys.frame_operator();
    assert!(s.hermiticity_residual() < 1e-12);
    let c = interior_compress(&sys, &s);
    let k = c.nrows();
    let mean = (0..k).map(|i| c[(i, i)].re).sum::<f64>() / k as f64;
    let dev = herm_eigenvalues(&(c - blobkit::linalg::CMat::identity(k, k) * Complex64::new(mean, 0.0)))
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(dev / mean <= 0.2, "{}", dev / mean);

    let lam = sys.sites()[3];
    let psi = coherent_state(sys.grid(), 0.7, -0.4);
    let a = s.apply(&heisenberg_apply(&psi, lam));
    let b = heisenberg_apply(&s.apply(&psi), lam);
    assert!(a.distance(&b) < 1e-6, "{}", a.distance(&b));
}

#[test]
fn covariance_under_generators() {
    let g = grid();
    let cases = [
        (MetaplecticGenerator::J, SymplecticMatrix::j(1)),
        (MetaplecticGenerator::Dilation(2.0), SymplecticMatrix::dilation(&Mat::from_element(1, 1, 2.0)).unwrap()),
    ];
    let lat = Lattice::separable(1.25, 2.5, RHO).unwrap();
    let base = WHSystem::new(SampledState::standard_gaussian(g), lat.clone()).unwrap();
    let b0r = base.frame_bounds().unwrap();
    for (mg, s) in cases {
        let w = metaplectic_matrix(&mg, &g).unwrap().apply(&base.window);
        let sys = WHSystem::new(w, lat.transformed(&s).unwrap()).unwrap();
        let b = sys.frame_bounds().unwrap();
        assert!((b.a - b0r.a).abs() <= 0.05 * b0r.a && (b.b - b0r.b).abs() <= 0.05 * b0r.b, "{mg:?}: {b:?} vs {b0r:?}");
    }
}

#[test]
fn expansion_and_reconstruction() {
    let sys = gauss_system(0.5);
    let e = sys.expand(&sys.window).unwrap();
    assert!(e.relative_error <= 1e-8, "{}", e.relative_error);
    assert!(e.ambiguity_gap <= 1e-8);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..3 {
        let psi = GaussianState::new(
            Mat::from_element(1, 1, rng.random_range(0.5..2.0)),
            Mat::from_element(1, 1, rng.random_range(-1.0..1.0)),
            vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)],
            1.0,
        )
        .unwrap()
        .sample(sys.grid())
        .unwrap();
        let e = sys.expand(&psi).unwrap();
        assert!(e.relative_error <= 1e-6, "{}", e.relative_error);
        assert!(e.ambiguity_gap <= 1e-8, "{}", e.ambiguity_gap);
    }
    assert!(matches!(gauss_system(2.0).expand(&sys.window), Err(Error::NoFrame(_))));
}

#[test]
fn deformed_gaussian_frame() {
    let g = grid();
    let (x, y) = (Mat::from_element(1, 1, 2.0), Mat::from_element(1, 1, 0.6));
    let window = GaussianState::centered(x.clone(), y.clone(), 1.0).unwrap().sample(g).unwrap();
    let lat = Lattice::square_with_density(0.5, 1.0, RHO).unwrap().transformed(&s_xy(&x, &y).unwrap()).unwrap();
    let sys = WHSystem::new(window, lat).unwrap();
    let psi = coherent_state(g, 1.0, -0.5);
    let e = sys.expand(&psi).unwrap();
    assert!(e.relative_error <= 1e-6, "{}", e.relative_error);
}

#[test]
fn dual_window_reconstructs() {
    let sys = gauss_system(0.5);
    let psi = coherent_state(sys.grid(), -0.5, 1.0);
    let dual = sys.canonical_dual().unwrap();
    let mut acc = vec![Complex64::new(0.0, 0.0); sys.grid().n];
    for site in sys.sites() {
        let c = psi.inner(&sys.atom(site));
        if c.norm() < 1e-14 {
            continue;
        }
        let d = dual.dual_atom(&sys, site);
        for (a, v) in acc.iter_mut().zip(&d.values) {
            *a += c * v;
        }
    }
    let rec = SampledState { grid: sys.grid(), values: acc };
    assert!(rec.distance(&psi) < 1e-6);
}

#[test]
fn multipliers_and_densities() {
    let sys = gauss_system(0.8);
    let n = sys.sites().len();
    let ones = vec![Complex64::new(1.0, 0.0); n];
    assert_eq!(sys.multiplier(&ones).unwrap().matrix, sys.frame_operator().matrix);

    let b = sys.frame_bounds().unwrap().b;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let w: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0)).collect();
    let m = sys.multiplier(&w).unwrap();
    assert!(m.hermiticity_residual() < 1e-10);
    let amax = w.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let compressed = interior_compress(&sys, &m);
    let onorm = compressed.singular_values().max();
    assert!(onorm <= amax * b + 1e-8);
    assert!(m.frobenius_norm().is_finite());

    let mut single = vec![Complex64::new(0.0, 0.0); n];
    single[5] = Complex64::new(2.0, 0.5);
    let m = sys.multiplier(&single).unwrap();
    let a = sys.atom(sys.sites()[5]);
    let g = sys.grid();
    let proj = blobkit::linalg::CMat::from_fn(g.n, g.n, |r, c| a.values[r] * a.values[c].conj() * g.dx * single[5]);
    assert!(blobkit::linalg::cmax_abs(&(m.matrix - proj)) < 1e-14);

    let mut p = vec![0.0; n];
    p[0] = 1.0;
    let rho = sys.density(&p).unwrap();
    assert!((rho.trace().re - 1.0).abs() < 1e-8);
    let mut p = vec![0.0; n];
    p[..9].iter_mut().for_each(|v| *v = 1.0 / 9.0);
    let rho = sys.density(&p).unwrap();
    assert!((rho.trace().re - 1.0).abs() < 1e-6);
    assert!(rho.hermitian_eigenvalues()[0] >= -1e-10);
    p[0] = 0.5;
    assert!(sys.density(&p).is_err());
    let mut bad = vec![0.0; n];
    bad[0] = f64::NAN;
    assert!(sys.multiplier(&bad.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>()).is_err());
}

#[test]
fn parseval_type_bounds() {
    let sys = gauss_system(0.5);
    let fb = sys.frame_bounds().unwrap();
    let atoms = sys.atoms();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let psi = coherent_state(sys.grid(), rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let energy: f64 = atoms.iter().map(|a| psi.inner(a).norm_sqr()).sum();
        let r = energy / psi.norm_sqr();
        assert!(r >= fb.a * (1.0 - 1e-8) && r <= fb.b * (1.0 + 1e-8), "{r} not in {fb:?}");
    }
}

#[test]
fn ambiguity_at_grid_points() {
    let g = grid();
    let psi = coherent_state(g, 0.3, 0.2);
    let phi = SampledState::standard_gaussian(g);
    let z = [2.0 * g.dx, 3.0 * g.dp()];
    let direct = psi.inner(&heisenberg_apply(&phi, z));
    assert!((direct - 2.0 * PI * ambiguity_at(&psi, &phi, z)).norm() < 1e-12);
}

#[test]
fn finite_section_bounds_follow_the_interior_box() {
    let lat = Lattice::separable(1.0, 3.0, 80.0).unwrap();
    let bounds = |g: SampleGrid| WHSystem::new(SampledState::standard_gaussian(g), lat.clone()).unwrap().frame_bounds().unwrap();
    let coarse = bounds(SampleGrid::centered(256, 12.0, 1.0).unwrap());
    let fine = bounds(SampleGrid::centered(512, 12.0, 1.0).unwrap());
    assert!((coarse.a - fine.a).abs() <= 1e-3 * fine.a, "{coarse:?} vs {fine:?}");
    assert!((coarse.b - fine.b).abs() <= 1e-3 * fine.b, "{coarse:?} vs {fine:?}");
    let wide = bounds(grid());
    assert!(wide.a < fine.a && wide.b > fine.b, "{wide:?} vs {fine:?}");
}
