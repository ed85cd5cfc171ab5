//! Acceptance suite: one line per criterion, exit status 1 if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use blobkit::blobs::{ellipsoid_capacity, uncertainty_psd, uncertainty_rs, CovarianceMatrix, QuantumBlob};
use blobkit::gabor::{covering_radius, Lattice, WHSystem};
use blobkit::gaussian_states::{crank_nicolson, from_blob, hamiltonian_xy_grid, to_blob, GaussianState};
use blobkit::linalg::Mat;
use blobkit::phasespace::{coherent_state, wigner, SampleGrid, SampledState};
use blobkit::symplectic::{pre_iwasawa, symplectic_residual, williamson_eigenvalues, SymplecticMatrix};
use blobkit::toeplitz::{
    density_matrix, semiclassical_sweep, toeplitz_quantize, toeplitz_via_weyl, SweepGrid, ToeplitzSpec, Window,
};
use blobkit::weyl::{
    metaplectic_matrix, moyal_star, plateau, weyl_quantize, DiscretizedOperator, GaussianBump, MetaplecticGenerator,
    Symbol,
};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HBAR: f64 = 1.0;

struct Part {
    label: &'static str,
    value: f64,
    bound: f64,
    at_least: bool,
}

impl Part {
    fn max(label: &'static str, value: f64, bound: f64) -> Self {
        Self { label, value, bound, at_least: false }
    }

    fn min(label: &'static str, value: f64, bound: f64) -> Self {
        Self { label, value, bound, at_least: true }
    }

    fn pass(&self) -> bool {
        if self.at_least {
            self.value >= self.bound
        } else {
            self.value <= self.bound
        }
    }
}

fn report(id: usize, name: &str, parts: &[Part], secs: f64) -> bool {
    let pass = parts.iter().all(Part::pass);
    let detail: Vec<String> = parts
        .iter()
        .map(|p| format!("{} {:.3e} {} {:.0e}", p.label, p.value, if p.at_least { ">=" } else { "<=" }, p.bound))
        .collect();
    println!("[{}] {id:2}. {name}: {} ({secs:.1}s)", if pass { "PASS" } else { "FAIL" }, detail.join("; "));
    pass
}

fn m1(v: f64) -> Mat {
    Mat::from_element(1, 1, v)
}

fn j(n: usize) -> Mat {
    let mut m = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, n + i)] = 1.0;
        m[(n + i, i)] = -1.0;
    }
    m
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Mat {
    let a = Mat::from_fn(n, n, |_, _| rng.random_range(-scale..scale));
    (&a + a.transpose()) * 0.5
}

/// exp(J H) for a random symmetric H: symplectic by construction, independent of the
/// library's generators.
fn random_sp(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Mat {
    (j(n) * random_sym(rng, 2 * n, scale)).exp()
}

fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn pre_iwasawa_roundtrip(rng: &mut ChaCha8Rng) -> Vec<Part> {
    let (mut recon, mut structure) = (0.0f64, 0.0f64);
    let mut l_min = f64::INFINITY;
    for k in 0..1000 {
        let n = 1 + k % 3;
        let s = random_sp(rng, n, 0.8);
        let f = pre_iwasawa(&SymplecticMatrix::with_tol(s.clone(), 1e-9).unwrap()).unwrap();
        recon = recon.max(max_abs(&(f.reconstruct() - &s)));
        let uvt = &f.u * f.v.transpose();
        structure = structure
            .max(max_abs(&(&f.p - f.p.transpose())))
            .max(max_abs(&(&f.l - f.l.transpose())))
            .max(max_abs(&(&f.u * f.u.transpose() + &f.v * f.v.transpose() - Mat::identity(n, n))))
            .max(max_abs(&(&uvt - uvt.transpose())))
            .max(symplectic_residual(&f.r).unwrap());
        l_min = l_min.min(f.l.symmetric_eigenvalues().min());
    }
    vec![Part::max("max|VMR-S|", recon, 1e-9), Part::max("structure", structure, 1e-9), Part::min("min eig L", l_min, 1e-12)]
}

fn uncertainty_equivalence(rng: &mut ChaCha8Rng) -> Vec<Part> {
    let (mut disagreements, mut spectrum_err) = (0usize, 0.0f64);
    for k in 0..500 {
        let n = 1 + k % 3;
        let lam: Vec<f64> = (0..n).map(|_| HBAR * rng.random_range(0.2..1.2)).collect();
        let expect = lam.iter().cloned().fold(f64::INFINITY, f64::min) >= HBAR / 2.0;
        let s = random_sp(rng, n, 0.5);
        let d = DVector::from_iterator(2 * n, lam.iter().chain(&lam).copied());
        let sigma = &s * Mat::from_diagonal(&d) * s.transpose();
        let cov = CovarianceMatrix::new((&sigma + sigma.transpose()) * 0.5).unwrap();
        let wl = williamson_eigenvalues(cov.matrix()).unwrap().min();
        let exact = lam.iter().cloned().fold(f64::INFINITY, f64::min);
        spectrum_err = spectrum_err.max((wl - exact).abs() / exact);
        let psd = uncertainty_psd(&cov, HBAR).unwrap();
        let will = wl >= HBAR / 2.0;
        let cap = ellipsoid_capacity(&cov, HBAR).unwrap() >= PI * HBAR;
        if !(psd == expect && will == expect && cap == expect) {
            disagreements += 1;
        }
    }
    // Every mode satisfies Δx Δp ≥ Δ(x,p)² + ħ²/4 but cross-mode correlations violate RS2.
    let mut sigma = Mat::identity(4, 4);
    for (a, b) in [(0, 3), (3, 0), (1, 2), (2, 1)] {
        sigma[(a, b)] = 0.9;
    }
    let cov = CovarianceMatrix::new(sigma).unwrap();
    let strict = uncertainty_rs(&cov, HBAR).unwrap().iter().all(|&b| b) && !uncertainty_psd(&cov, HBAR).unwrap();
    vec![
        Part::max("disagreements", disagreements as f64, 0.0),
        Part::max("williamson rel err", spectrum_err, 1e-9),
        Part::min("RS1 true & RS2 false", if strict { 1.0 } else { 0.0 }, 1.0),
    ]
}

fn gamma_bijection(rng: &mut ChaCha8Rng) -> Vec<Part> {
    let (mut roundtrip, mut quotient) = (0usize, 0usize);
    for k in 0..500 {
        let n = 1 + k % 3;
        let s = SymplecticMatrix::with_tol(random_sp(rng, n, 0.7), 1e-9).unwrap();
        let z0: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let q = QuantumBlob::new(s.clone(), z0.clone(), HBAR).unwrap();
        let back = to_blob(&from_blob(&q).unwrap()).unwrap();
        let (a, b) = (q.normal_form().unwrap(), back.normal_form().unwrap());
        if max_abs(&(&a.p - &b.p)) > 1e-8 || max_abs(&(&a.l - &b.l)) > 1e-8 {
            roundtrip += 1;
        }
        // S·R with R a symplectic rotation: exp(J H) with H commuting with J.
        let (u, w) = (random_sym(rng, n, 1.0), Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)));
        let anti = (&w - w.transpose()) * 0.5;
        let gen = blobkit::linalg::from_blocks(&anti, &u, &(-&u), &anti);
        let r = SymplecticMatrix::with_tol(gen.exp(), 1e-9).unwrap();
        let rotated = QuantumBlob::new(s.compose(&r), z0, HBAR).unwrap();
        if !from_blob(&rotated).unwrap().same_ray(&from_blob(&q).unwrap(), 1e-8) {
            quotient += 1;
        }
    }
    vec![Part::max("roundtrip failures", roundtrip as f64, 0.0), Part::max("rotation-quotient failures", quotient as f64, 0.0)]
}

/// (πħ)⁻¹exp(−[X(x−x₀)² + (p−p₀ + Y(x−x₀))²/X]/ħ)
fn wxy(x: f64, y: f64, z0: [f64; 2], q: f64, p: f64) -> f64 {
    let (u, v) = (q - z0[0], p - z0[1]);
    (-(x * u * u + (v + y * u).powi(2) / x) / HBAR).exp() / (PI * HBAR)
}

fn wigner_oracle(rng: &mut ChaCha8Rng) -> Vec<Part> {
    let grid = SampleGrid::default_for(HBAR).unwrap();
    let max_err = |state: &GaussianState, x: f64, y: f64, z0: [f64; 2]| {
        let w = wigner(&state.sample(grid).unwrap()).unwrap();
        let mut e = 0.0f64;
        for i in 0..w.nx {
            for k in 0..w.np {
                e = e.max((w.get(i, k) - wxy(x, y, z0, w.x(i), w.p(k))).norm());
            }
        }
        e
    };
    let phi0 = max_err(&GaussianState::standard(1, HBAR).unwrap(), 1.0, 0.0, [0.0, 0.0]);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (x, y) = (rng.random_range(0.4..2.5), rng.random_range(-1.5..1.5));
        let z0 = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        worst = worst.max(max_err(&GaussianState::new(m1(x), m1(y), z0.to_vec(), HBAR).unwrap(), x, y, z0));
    }
    vec![Part::max("phi0", phi0, 1e-6), Part::max("psi_XY (20)", worst, 1e-6)]
}

fn random_smooth_state(rng: &mut ChaCha8Rng, grid: SampleGrid) -> SampledState {
    let c = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
    match rng.random_range(0..3) {
        0 => GaussianState::new(m1(rng.random_range(0.5..2.0)), m1(rng.random_range(-1.0..1.0)), c.to_vec(), HBAR)
            .unwrap()
            .sample(grid)
            .unwrap(),
        1 => {
            let a = coherent_state(grid, c[0], c[1]);
            let b = coherent_state(grid, -c[1], c[0]);
            a.add(&b.scaled(Complex64::from_polar(rng.random_range(0.3..1.0), rng.random_range(0.0..2.0 * PI))))
                .normalized()
                .unwrap()
        }
        _ => SampledState::from_fn(grid, |x| {
            let u = x - c[0];
            Complex64::from_polar(u * (-u * u / 2.0).exp(), c[1] * x)
        })
        .normalized()
        .unwrap(),
    }
}

fn moyal_and_marginals(rng: &mut ChaCha8Rng) -> Vec<Part> {
    let grid = SampleGrid::default_for(HBAR).unwrap();
    let (mut moyal, mut marg) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let psi = random_smooth_state(rng, grid);
        let phi = random_smooth_state(rng, grid);
        let (wp, wf) = (wigner(&psi).unwrap(), wigner(&phi).unwrap());
        let overlap: Complex64 = psi.values.iter().zip(&phi.values).map(|(a, b)| a.conj() * b).sum::<Complex64>() * grid.dx;
        let expect = overlap.norm_sqr() / (2.0 * PI * HBAR);
        let got = wp.inner(&wf).re;
        moyal = moyal.max((got - expect).abs() / expect);
        let dens: Vec<f64> = psi.values.iter().map(|v| v.norm_sqr()).collect();
        let peak = dens.iter().cloned().fold(0.0, f64::max);
        for (i, d) in dens.iter().enumerate() {
            let xm: f64 = wp.row(i).iter().map(|v| v.re).sum::<f64>() * grid.dp();
            marg = marg.max((xm - d).abs() / peak);
        }
        let mom = psi.momentum_amplitudes();
        let mpeak = mom.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
        for (k, a) in mom.iter().enumerate() {
            let pm: f64 = (0..wp.nx).map(|i| wp.get(i, k).re).sum::<f64>() * grid.dx;
            marg = marg.max((pm - a.norm_sqr()).abs() / mpeak);
        }
    }
    vec![Part::max("moyal rel", moyal, 1e-6), Part::max("marginals rel", marg, 1e-6)]
}

fn eigenvalue_and_evolution(rng: &mut ChaCha8Rng) -> Vec<Part> {
    let grid = SampleGrid::default_for(HBAR).unwrap();
    let mut residual = 0.0f64;
    let mut first = None;
    for _ in 0..10 {
        let (x, y) = (rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0));
        let psi = GaussianState::centered(m1(x), m1(y), HBAR).unwrap().sample(grid).unwrap();
        let h = hamiltonian_xy_grid(x, y, &grid);
        let v = DVector::from_vec(psi.values.clone());
        let r = (&h * &v - &v * Complex64::new(HBAR * x / 2.0, 0.0)).norm() / v.norm();
        residual = residual.max(r);
        first.get_or_insert((x, h, psi));
    }
    let (x, h, psi) = first.unwrap();
    let t = 0.1;
    let evolved = crank_nicolson(&h, &psi, t, 200, HBAR).unwrap();
    let exact = psi.scaled(Complex64::from_polar(1.0, -t * x / 2.0));
    let cn = evolved.distance(&exact) / psi.norm();
    vec![Part::max("eigen residual", residual, 1e-6), Part::max("CN phase t=0.1", cn, 1e-4)]
}

fn weyl_layer() -> Vec<Part> {
    let grid = SampleGrid::default_for(HBAR).unwrap();
    let id = weyl_quantize(&Symbol::constant(1.0), &grid).unwrap().max_abs_diff(&DiscretizedOperator::identity(grid));
    let eig = weyl_quantize(&Symbol::harmonic_oscillator(), &grid).unwrap().hermitian_eigenvalues();
    let ho = (0..6).fold(0.0f64, |m, k| m.max((eig[k] - HBAR * (k as f64 + 0.5)).abs()));

    let xs = Symbol::from_real_fn(|x, p| x * plateau(x, 6.0, 1.0) * plateau(p, 6.0, 1.0));
    let ps = Symbol::from_real_fn(|x, p| p * plateau(x, 6.0, 1.0) * plateau(p, 6.0, 1.0));
    let xp = moyal_star(&xs, &ps, &grid).unwrap();
    let px = moyal_star(&ps, &xs, &grid).unwrap();
    let mut comm = 0.0f64;
    for i in 0..xp.nx {
        for k in 0..xp.np {
            if xp.x(i).abs() <= 2.0 && xp.p(k).abs() <= 2.0 {
                comm = comm.max((xp.get(i, k) - px.get(i, k) - Complex64::new(0.0, HBAR)).norm());
            }
        }
    }

    let sym = SampleGrid::symmetric(256, HBAR).unwrap();
    let a = Symbol::gaussian(vec![GaussianBump { amplitude: 1.0, center: [0.5, -0.3], matrix: [[0.8, 0.2], [0.2, 0.5]] }]);
    let target = weyl_quantize(&a, &sym).unwrap();
    let mut cov = 0.0f64;
    for g in [MetaplecticGenerator::J, MetaplecticGenerator::Shear(0.6), MetaplecticGenerator::Dilation(1.3)] {
        let s = metaplectic_matrix(&g, &sym).unwrap();
        let sinv = metaplectic_matrix(&g.inverse(), &sym).unwrap();
        let lhs = s.compose(&weyl_quantize(&a.compose_linear(g.symplectic()).unwrap(), &sym).unwrap()).compose(&sinv);
        cov = cov.max(lhs.max_abs_diff(&target));
    }
    vec![
        Part::max("Op(1)-I", id, 1e-8),
        Part::max("HO k<=5", ho, 1e-5),
        Part::max("[x,p]*-iħ", comm, 1e-6),
        Part::max("covariance", cov, 1e-5),
    ]
}

fn gabor_threshold() -> Vec<Part> {
    let grid = SampleGrid::symmetric(256, HBAR).unwrap();
    let rho = covering_radius(&grid) + 3.0;
    let system = |d: f64| WHSystem::new(SampledState::standard_gaussian(grid), Lattice::square_with_density(d, HBAR, rho).unwrap()).unwrap();
    let ratios: Vec<f64> = [0.5, 0.8, 1.25, 2.0].iter().map(|&d| system(d).frame_bounds().unwrap().ratio()).collect();
    let violations = ratios.windows(2).filter(|w| w[1] > w[0]).count();
    let drop = ratios[1] / ratios[2].max(f64::MIN_POSITIVE);

    let sys = system(0.5);
    let dual = sys.canonical_dual().unwrap();
    let psi = GaussianState::new(m1(1.4), m1(-0.3), vec![0.8, -0.6], HBAR).unwrap().sample(grid).unwrap();
    let mut recon = vec![Complex64::new(0.0, 0.0); grid.n];
    for site in sys.sites() {
        let atom = sys.atom(site);
        let c: Complex64 = atom.values.iter().zip(&psi.values).map(|(a, b)| a.conj() * b).sum::<Complex64>() * grid.dx;
        for (r, g) in recon.iter_mut().zip(&dual.dual_atom(&sys, site).values) {
            *r += c * g;
        }
    }
    let err = SampledState { grid, values: recon }.distance(&psi) / psi.norm();
    vec![
        Part::max("monotone violations", violations as f64, 0.0),
        Part::min("drop 0.8->1.25", drop, 100.0),
        Part::max("dual reconstruction", err, 1e-6),
    ]
}

fn toeplitz_windows(grid: SampleGrid) -> Vec<Window> {
    vec![
        Window::Gaussian(GaussianState::standard(1, HBAR).unwrap()),
        Window::Gaussian(GaussianState::new(m1(2.0), m1(0.7), vec![0.3, -0.2], HBAR).unwrap()),
        Window::Sampled(coherent_state(grid, 1.0, -1.0)),
        Window::Sampled(SampledState::from_real_fn(grid, |x| x * (-x * x / 2.0).exp()).normalized().unwrap()),
        Window::Sampled(
            SampledState::from_real_fn(grid, |x| (-(x - 1.0).powi(2)).exp() + 0.5 * (-(x + 1.0).powi(2) / 2.0).exp())
                .normalized()
                .unwrap(),
        ),
    ]
}

fn toeplitz_equivalence(rng: &mut ChaCha8Rng) -> Vec<Part> {
    let grid = SampleGrid::symmetric(128, HBAR).unwrap();
    let windows = toeplitz_windows(grid);
    let (mut gap, mut min_eig) = (0.0f64, f64::INFINITY);
    for _ in 0..20 {
        let bumps = (0..rng.random_range(1..4))
            .map(|_| {
                let (a, b): (f64, f64) = (rng.random_range(0.2..1.5), rng.random_range(0.2..1.5));
                let c = rng.random_range(-0.3..0.3) * (a * b).sqrt();
                GaussianBump {
                    amplitude: rng.random_range(0.1..2.0),
                    center: [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)],
                    matrix: [[a, c], [c, b]],
                }
            })
            .collect();
        let a = Symbol::gaussian(bumps);
        for w in &windows {
            let spec = ToeplitzSpec::new(a.clone(), w.clone(), HBAR).unwrap();
            let direct = toeplitz_quantize(&spec, &grid).unwrap();
            gap = gap.max(direct.max_abs_diff(&toeplitz_via_weyl(&spec, &grid).unwrap()));
            min_eig = min_eig.min(direct.hermitian_eigenvalues()[0]);
        }
    }
    let id = windows
        .iter()
        .map(|w| {
            let spec = ToeplitzSpec::new(Symbol::constant(1.0), w.clone(), HBAR).unwrap();
            toeplitz_quantize(&spec, &grid).unwrap().max_abs_diff(&DiscretizedOperator::identity(grid))
        })
        .fold(0.0f64, f64::max);
    vec![Part::max("route gap", gap, 1e-4), Part::max("Op_TO(1)-I", id, 1e-4), Part::min("min eig (a>=0)", min_eig, -1e-9)]
}

fn density_matrices() -> Vec<Part> {
    let grid = SampleGrid::symmetric(128, HBAR).unwrap();
    let (c00, c01, c11): (f64, f64, f64) = (0.8, 0.3, 0.6);
    let det = c00 * c11 - c01 * c01;
    let inv = [[c11 / det, -c01 / det], [-c01 / det, c00 / det]];
    let mus = [
        Symbol::gaussian(vec![GaussianBump::isotropic(1.0 / (PI * HBAR), [0.0, 0.0], HBAR.sqrt())]),
        Symbol::gaussian(vec![GaussianBump {
            amplitude: 1.0 / (2.0 * PI * det.sqrt()),
            center: [1.0, -0.5],
            matrix: [[0.5 * inv[0][0], 0.5 * inv[0][1]], [0.5 * inv[1][0], 0.5 * inv[1][1]]],
        }]),
    ];
    let (mut trace, mut min_eig, mut spectral) = (0.0f64, f64::INFINITY, 0.0f64);
    for mu in &mus {
        for w in toeplitz_windows(grid).into_iter().take(2) {
            let sampled = w.sample(&grid).unwrap();
            let rho = density_matrix(mu, w, &grid).unwrap();
            let tc = rho.trace_checks(mu, &sampled).unwrap();
            for t in [tc.matrix_trace, tc.smoothed_integral, tc.fourier_product] {
                trace = trace.max((t - 1.0).abs());
            }
            min_eig = min_eig.min(rho.min_eigenvalue);
            spectral = spectral.max(rho.spectral_identity_residual(mu, &sampled, 1e-14).unwrap());
        }
    }
    vec![Part::max("|trace-1| x3", trace, 1e-4), Part::min("min eig", min_eig, -1e-9), Part::max("spectral identity", spectral, 1e-3)]
}

fn semiclassical() -> Vec<Part> {
    let hbars = [1.0, 0.5, 0.25, 0.125];
    let sg = SweepGrid::default();
    let s = semiclassical_sweep(&Symbol::SinProduct { amplitude: 1.0, kx: 1.0, kp: 1.0 }, 1.0, 0.0, &hbars, &sg).unwrap();
    let violations = s.windows(2).filter(|w| w[1].deviation >= w[0].deviation).count();
    let (x, y) = (1.7, 0.6);
    let q = semiclassical_sweep(&Symbol::polynomial(&[(2, 0, 1.0), (0, 2, 1.0)]), x, y, &hbars, &sg).unwrap();
    // Tr of the Wigner covariance (ħ/2)G⁻¹ of ψ_XY.
    let oracle = q.iter().map(|p| (p.deviation - p.hbar / 2.0 * (x + 1.0 / x + y * y / x)).abs()).fold(0.0f64, f64::max);
    vec![
        Part::max("decreasing violations", violations as f64, 0.0),
        Part::max("d(1/8)/d(1)", s[3].deviation / s[0].deviation, 0.2),
        Part::max("quadratic moment", oracle, 1e-8),
    ]
}

fn main() -> ExitCode {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let mut all = true;
    let start = Instant::now();
    let mut run = |id: usize, name: &str, f: &mut dyn FnMut(&mut ChaCha8Rng) -> Vec<Part>| {
        let t = Instant::now();
        let parts = f(&mut rng);
        all &= report(id, name, &parts, t.elapsed().as_secs_f64());
    };
    run(1, "pre-Iwasawa roundtrip", &mut pre_iwasawa_roundtrip);
    run(2, "uncertainty equivalence", &mut uncertainty_equivalence);
    run(3, "Gamma bijection", &mut gamma_bijection);
    run(4, "Wigner oracle", &mut wigner_oracle);
    run(5, "Moyal identity and marginals", &mut moyal_and_marginals);
    run(6, "eigenvalue equation and phase evolution", &mut eigenvalue_and_evolution);
    run(7, "Weyl layer", &mut |_| weyl_layer());
    run(8, "Gabor threshold", &mut |_| gabor_threshold());
    run(9, "Toeplitz equivalence", &mut toeplitz_equivalence);
    run(10, "density matrices", &mut |_| density_matrices());
    run(11, "semiclassical sweep", &mut |_| semiclassical());
    println!("acceptance: {} in {:.1}s", if all { "all criteria pass" } else { "FAILURES" }, start.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
