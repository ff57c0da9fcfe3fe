//! Density matrices and pure states: validation, sampling, unitary dynamics
//! and elementary statistics.

mod io;
mod random;

pub use io::{
    load_observables, load_state, read_observables_json, read_state_json, write_state_json,
    StateFile,
};
pub use random::{random_density_hs, random_pure, SeedSpec};

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{hermitian_eig, CMatrix, EigenDecomposition, Hermitian, LinalgError};

/// Allowed deviation of `Tr rho` from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted in a density matrix.
pub const MIN_EIGENVALUE_TOL: f64 = -1e-9;
/// Eigen-weights below this are dropped from pure decompositions.
pub const WEIGHT_CUTOFF: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StateError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("trace is {0}, expected 1")]
    Trace(f64),
    #[error("state is not positive semidefinite (minimum eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("state vector has zero norm")]
    ZeroNorm,
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("malformed state file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Positive semidefinite, unit-trace Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Hermitian);

impl DensityMatrix {
    /// Validates trace (within 1e-10) and positivity (eigenvalues >= -1e-9).
    pub fn new(h: Hermitian) -> Result<Self, StateError> {
        let tr = h.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(StateError::Trace(tr));
        }
        let e = hermitian_eig(&h)?;
        if e.min_value() < MIN_EIGENVALUE_TOL {
            return Err(StateError::NotPsd(e.min_value()));
        }
        Ok(Self(h))
    }

    /// Accepts any PSD operator with positive trace and rescales it to unit trace.
    pub fn normalized(h: Hermitian) -> Result<Self, StateError> {
        let tr = h.trace();
        if !(tr > 0.0) {
            return Err(StateError::Trace(tr));
        }
        Self::new(h.scale(1.0 / tr))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(Hermitian::identity(d).scale(1.0 / d as f64))
    }

    /// Computational basis state `|k><k|`.
    pub fn basis(d: usize, k: usize) -> Self {
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        Self(Hermitian::diag(&v))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self(Hermitian::projector(psi.amplitudes()))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn operator(&self) -> &Hermitian {
        &self.0
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        self.0.matrix()
    }

    /// `rho^T`, again a density matrix.
    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn eig(&self) -> EigenDecomposition {
        // validated at construction, so Jacobi has already converged once on it
        hermitian_eig(&self.0).expect("eigendecomposition of a validated state")
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0)
    }

    /// Convex combination `p self + (1-p) other`.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<Self, StateError> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(self.0.scale(p).add(&other.0.scale(1.0 - p))))
    }
}

/// Normalised state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState(Vec<Complex64>);

impl PureState {
    /// Normalises `amplitudes`; fails on the zero vector.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(StateError::ZeroNorm);
        }
        Ok(Self(amplitudes.into_iter().map(|z| z / norm).collect()))
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        v[k] = Complex64::new(1.0, 0.0);
        Self(v)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|<self|other>|^2`.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// Weighted pure-state ensemble `sum_k p_k |psi_k><psi_k|`, optionally paired
/// with right-hand states `|phi_k>` for product decompositions.
#[derive(Clone, Debug)]
pub struct PureDecomposition {
    pub weights: Vec<f64>,
    pub left: Vec<PureState>,
    pub right: Option<Vec<PureState>>,
}

impl PureDecomposition {
    /// `sum_k p_k |psi_k><psi_k|`.
    pub fn left_marginal(&self) -> Hermitian {
        let d = self.left.first().map_or(0, PureState::dim);
        self.weights
            .iter()
            .zip(&self.left)
            .fold(Hermitian::zeros(d), |acc, (&p, psi)| {
                acc.add(&Hermitian::projector(psi.amplitudes()).scale(p))
            })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn check_dims(a: usize, b: usize) -> Result<(), StateError> {
    if a != b {
        Err(StateError::Dimension(a, b))
    } else {
        Ok(())
    }
}

/// `e^{-iH theta} rho e^{+iH theta}`, with the exponential taken through the
/// eigendecomposition of `H`.
pub fn evolve(rho: &DensityMatrix, h: &Hermitian, theta: f64) -> Result<DensityMatrix, StateError> {
    check_dims(rho.dim(), h.dim())?;
    let u = unitary(h, theta)?;
    Ok(DensityMatrix(rho.operator().conjugate_by(&u)))
}

/// `e^{-iH theta}`.
pub fn unitary(h: &Hermitian, theta: f64) -> Result<CMatrix, StateError> {
    let e = hermitian_eig(h)?;
    let n = h.dim();
    let mut scaled = e.vectors.clone();
    for j in 0..n {
        let phase = Complex64::from_polar(1.0, -e.values[j] * theta);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    Ok(scaled.matmul(&e.vectors.adjoint()))
}

/// `<H> = Tr(H rho)`.
pub fn expectation(rho: &DensityMatrix, h: &Hermitian) -> Result<f64, StateError> {
    check_dims(rho.dim(), h.dim())?;
    Ok(rho.operator().trace_product(h))
}

/// `<H^2> - <H>^2`, clipped at zero against round-off.
pub fn variance(rho: &DensityMatrix, h: &Hermitian) -> Result<f64, StateError> {
    let mean = expectation(rho, h)?;
    let second = rho.operator().trace_product(&h.square());
    Ok((second - mean * mean).max(0.0))
}

/// `Tr rho^2`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

/// Spectral decomposition as a pure-state ensemble. Weights below 1e-12 are
/// dropped and the rest renormalised.
pub fn eigen_decomposition_of_state(rho: &DensityMatrix) -> PureDecomposition {
    let e = rho.eig();
    let mut weights = Vec::new();
    let mut left = Vec::new();
    for k in 0..e.dim() {
        let w = e.values[k].max(0.0);
        if w < WEIGHT_CUTOFF {
            continue;
        }
        weights.push(w);
        left.push(PureState(e.vector(k)));
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    PureDecomposition {
        weights,
        left,
        right: None,
    }
}
