use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cmax_abs, herm_eigen, herm_eigenvalues, CMat};
use crate::phasespace::io::GridRecord;
use crate::phasespace::{SampleGrid, SampledState};

/// N×N matrix acting on grid samples: (Âψ)_j = Σ_l M_{jl} ψ_l, with M = K(x_j, x_l)·dx.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedOperator {
    pub grid: SampleGrid,
    pub matrix: CMat,
    pub label: String,
}

impl DiscretizedOperator {
    pub fn new(grid: SampleGrid, matrix: CMat, label: impl Into<String>) -> Result<Self> {
        if matrix.nrows() != grid.n || matrix.ncols() != grid.n {
            return Err(Error::InvalidDimension("operator matrix does not match the grid".into()));
        }
        if matrix.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite operator entry".into()));
        }
        Ok(Self { grid, matrix, label: label.into() })
    }

    pub fn identity(grid: SampleGrid) -> Self {
        Self { grid, matrix: CMat::identity(grid.n, grid.n), label: "identity".into() }
    }

    pub fn zeros(grid: SampleGrid, label: impl Into<String>) -> Self {
        Self { grid, matrix: CMat::zeros(grid.n, grid.n), label: label.into() }
    }

    pub fn apply(&self, psi: &SampledState) -> SampledState {
        let v = nalgebra::DVector::from_column_slice(&psi.values);
        let out = &self.matrix * v;
        SampledState { grid: psi.grid, values: out.iter().copied().collect() }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            grid: self.grid,
            matrix: &self.matrix * &other.matrix,
            label: format!("({})·({})", self.label, other.label),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self { grid: self.grid, matrix: self.matrix.adjoint(), label: format!("({})†", self.label) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { grid: self.grid, matrix: &self.matrix - &other.matrix, label: format!("{} - {}", self.label, other.label) }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { grid: self.grid, matrix: &self.matrix * c, label: self.label.clone() }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        cmax_abs(&(&self.matrix - &other.matrix))
    }

    pub fn hermiticity_residual(&self) -> f64 {
        cmax_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn unitarity_residual(&self) -> f64 {
        let n = self.grid.n;
        cmax_abs(&(&self.matrix * self.matrix.adjoint() - CMat::identity(n, n)))
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.matrix.clone().singular_values().max()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        herm_eigenvalues(&self.matrix)
    }

    /// Eigen-decomposition of the Hermitian part with eigenvectors as normalized states.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, Vec<SampledState>) {
        let (vals, vecs) = herm_eigen(&self.matrix);
        let scale = 1.0 / self.grid.dx.sqrt();
        let states = (0..vecs.ncols())
            .map(|c| SampledState {
                grid: self.grid,
                values: vecs.column(c).iter().map(|v| v * scale).collect(),
            })
            .collect();
        (vals, states)
    }

    pub fn to_record(&self) -> GridRecord {
        let n = self.grid.n;
        GridRecord {
            nx: n,
            np: n,
            dx: self.grid.dx,
            dp: self.grid.dx,
            x0: self.grid.x0,
            hbar: self.grid.hbar,
            complex: true,
            label: self.label.clone(),
            data: (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| self.matrix[(r, c)]).collect(),
        }
    }
}
