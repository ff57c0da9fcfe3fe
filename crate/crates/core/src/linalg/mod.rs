//! Dense complex linear algebra for small Hermitian problems.
//!
//! Everything here targets matrices of dimension at most 64: density matrices,
//! couplings on two or four parties, and the observables acting on them.

mod eig;
mod matrix;
mod operators;
mod tensor;

pub use eig::{hermitian_eig, hermitian_eig_warm, psd_sqrt, EigenDecomposition};
pub use matrix::{c64, CMatrix, Hermitian};
pub use operators::{jz_operator, su_generators, swap_operator, swap_parties, symmetric_projector};
pub(crate) use tensor::partial_transpose_permutation;
pub use tensor::{embed_operator, kron, partial_trace, partial_transpose};

use thiserror::Error;

/// Tolerance on `max |M - M^dagger|` accepted when wrapping a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues down to this value are treated as zero by PSD routines.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not PSD (minimum eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:.3e})")]
    NoConvergence { sweeps: usize, residual: f64 },
}
