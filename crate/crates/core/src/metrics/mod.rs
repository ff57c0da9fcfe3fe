//! Fidelities, information quantities and the Wasserstein-type distances
//! built on couplings.
//!
//! Closed forms live in [`closed`]; everything that needs an optimisation over
//! couplings goes through [`crate::sdp`]. Separability is relaxed to the PPT
//! cone, so every SDP-backed quantity comes back as a [`DistanceReport`] whose
//! [`BoundKind`] says how the number relates to the separable optimum.

mod closed;
mod multi;
mod transport;

pub use closed::{
    bures_distance_sq, decomp_upper_bound, delta_sq, euclid_sq, fidelity_second_derivative, qfi,
    skew_information, superfidelity, uhlmann_fidelity,
};
pub use multi::{bsf_p_distance_sq, p_swap_fidelity};
pub use transport::{
    bsf_distance_sq, decomp_distance_sq, dpt_distance_sq, modified_dpt_sq, self_distance_sq,
    swap_distance_sq, swap_fidelity,
};

use thiserror::Error;

use crate::linalg::{jz_operator, su_generators, Hermitian, LinalgError};
use crate::sdp::{SdpError, SdpResult, Status};
use crate::states::StateError;

/// Tolerance for the full-set orthonormality and tracelessness checks.
pub const FULL_SET_TOL: f64 = 1e-10;
/// Modified distances between this and zero are clipped to zero.
pub const NEGATIVE_CLIP: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("modified distance is {0:.3e}, below the self-distance bound; the solver result is not trustworthy")]
    Negative(f64),
    #[error("equality constraints reported inconsistent for a feasible program")]
    Infeasible,
}

/// Observables `H_1..H_N` on a `d`-dimensional system.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    dim: usize,
    ops: Vec<Hermitian>,
    full_set: bool,
}

impl ObservableSet {
    /// Checks dimensions and decides the full-set flag from the operators
    /// themselves: `d^2 - 1` traceless operators with `Tr(H_n H_m) = 2 delta_nm`.
    pub fn new(ops: Vec<Hermitian>) -> Result<Self, MetricsError> {
        let Some(first) = ops.first() else {
            return Err(MetricsError::Argument("observable set is empty".into()));
        };
        let dim = first.dim();
        if let Some(bad) = ops.iter().find(|h| h.dim() != dim) {
            return Err(MetricsError::Dimension(bad.dim(), dim));
        }
        let full_set = ops.len() == dim * dim - 1
            && ops.iter().all(|h| h.trace().abs() <= FULL_SET_TOL)
            && ops.iter().enumerate().all(|(n, a)| {
                ops.iter().enumerate().all(|(m, b)| {
                    let want = if n == m { 2.0 } else { 0.0 };
                    (a.trace_product(b) - want).abs() <= FULL_SET_TOL
                })
            });
        Ok(Self { dim, ops, full_set })
    }

    /// Generalised Gell-Mann matrices.
    pub fn su(d: usize) -> Self {
        Self::new(su_generators(d)).expect("generators share a dimension")
    }

    /// `sigma_z` for `d = 2`, `J_z` otherwise.
    pub fn z(d: usize) -> Self {
        let h = if d == 2 {
            Hermitian::diag(&[1.0, -1.0])
        } else {
            jz_operator(d)
        };
        Self::new(vec![h]).expect("single operator")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Hermitian] {
        &self.ops
    }

    pub fn is_full_set(&self) -> bool {
        self.full_set
    }
}

/// Feasible set of couplings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeKind {
    /// All couplings.
    All,
    /// Couplings with positive partial transpose, the stand-in for separable ones.
    Ppt,
}

/// Marginal and cost conventions of the two-party distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    /// Transposed first argument: cost `(H^T ⊗ I - I ⊗ H)^2`, party-1 marginal
    /// `rho^T`, party-2 marginal `sigma`.
    Dpt,
    /// Plain operators and marginals.
    Gmpc,
}

/// How a reported number relates to the quantity it names.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundKind {
    Exact,
    LowerBound,
    UpperBound,
    /// The quantity lies in `[lo, hi]`; also used when a solve hit its
    /// iteration cap, with the solver's certified bracket.
    Interval(f64, f64),
}

impl BoundKind {
    pub fn label(&self) -> &'static str {
        match self {
            BoundKind::Exact => "exact",
            BoundKind::LowerBound => "lower-bound",
            BoundKind::UpperBound => "upper-bound",
            BoundKind::Interval(..) => "interval",
        }
    }
}

/// Summary of one SDP run behind a report.
#[derive(Clone, Debug)]
pub struct SolveDiagnostics {
    pub status: Status,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub value_interval: (f64, f64),
}

impl From<&SdpResult> for SolveDiagnostics {
    fn from(r: &SdpResult) -> Self {
        Self {
            status: r.status,
            iterations: r.iterations,
            primal_residual: r.primal_residual,
            dual_residual: r.dual_residual,
            gap: r.gap,
            value_interval: r.value_interval,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DistanceReport {
    /// A squared distance or a fidelity.
    pub value: f64,
    pub bound: BoundKind,
    pub method: String,
    /// Optimal coupling of the (last) solve, when there is a single one.
    pub coupling: Option<Hermitian>,
    /// One entry per SDP run; empty for closed forms.
    pub solves: Vec<SolveDiagnostics>,
}

impl DistanceReport {
    pub fn closed_form(value: f64, method: impl Into<String>) -> Self {
        Self {
            value,
            bound: BoundKind::Exact,
            method: method.into(),
            coupling: None,
            solves: Vec::new(),
        }
    }

    /// True unless some solve stopped at its iteration cap.
    pub fn converged(&self) -> bool {
        self.solves.iter().all(|s| s.status == Status::Converged)
    }

    pub fn total_iterations(&self) -> usize {
        self.solves.iter().map(|s| s.iterations).sum()
    }
}
