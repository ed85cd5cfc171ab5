//! Grid-based (n = 1) phase-space transforms.

pub mod fft;
mod grid;
pub mod io;
mod transforms;

pub use grid::{PhaseSpaceFunction, SampleGrid, SampledState};
pub use transforms::{
    check_support, coherent_state, convolve_periodic, convolve_periodic_sampled, cross_ambiguity,
    cross_wigner, cross_wigner_unchecked, fft2, husimi, s0_norm, symplectic_fourier, wigner,
    EDGE_TOL,
};
