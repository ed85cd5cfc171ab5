//! The blob-operator symbol approaches the classical symbol as ħ → 0.

use blobkit::toeplitz::{semiclassical_sweep, SweepGrid};
use blobkit::weyl::Symbol;

fn main() -> blobkit::Result<()> {
    let hbars = [1.0, 0.5, 0.25, 0.125, 0.0625];
    let sg = SweepGrid::default();
    let cases = [
        ("sin x sin p", Symbol::SinProduct { amplitude: 1.0, kx: 1.0, kp: 1.0 }),
        ("x² + p²", Symbol::polynomial(&[(2, 0, 1.0), (0, 2, 1.0)])),
    ];
    for (name, a) in cases {
        println!("{name}");
        for p in semiclassical_sweep(&a, 1.5, 0.5, &hbars, &sg)? {
            println!("  ħ = {:<7} d = {:.6e}  d/ħ = {:.4}", p.hbar, p.deviation, p.ratio);
        }
    }
    Ok(())
}
