//! Phase-space quantization toolkit: symplectic factorizations, quantum blobs, Gaussian
//! states, Wigner and ambiguity transforms, Weyl and Toeplitz quantization, Gabor frames.

pub mod error;
pub mod linalg;
pub mod symplectic;
pub mod blobs;
pub mod phasespace;
pub mod gaussian_states;
pub mod weyl;
pub mod gabor;
pub mod toeplitz;
pub mod cli;

pub use error::{Error, Result};
