//! Four-party (`p = 2`) programs: the p-SWAP fidelity and the O-based
//! p-distance.
//!
//! Parties 0 and 1 carry `rho`, parties 2 and 3 carry `sigma`. Separability is
//! relaxed to PPT across the `(01|23)` cut and across every single party.

use super::transport::{Relaxation, Solved};
use super::{DistanceReport, MetricsError};
use crate::linalg::{swap_parties, Hermitian};
use crate::sdp::{CouplingProgram, Sense, SolverSettings};
use crate::states::DensityMatrix;

/// Largest composite dimension `d^(2p)` the four-party programs accept.
pub const MAX_COMPOSITE_DIM: usize = 64;

fn program(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    p: usize,
    sense: Sense,
    cost: impl FnOnce(usize) -> Hermitian,
    enforce_symmetric: bool,
) -> Result<CouplingProgram, MetricsError> {
    if p != 2 {
        return Err(MetricsError::Unsupported(format!(
            "p = {p}; only p = 2 is implemented"
        )));
    }
    if rho.dim() != sigma.dim() {
        return Err(MetricsError::Dimension(rho.dim(), sigma.dim()));
    }
    let d = rho.dim();
    let total = d.pow(4);
    if total > MAX_COMPOSITE_DIM {
        return Err(MetricsError::Unsupported(format!(
            "composite dimension {total} exceeds {MAX_COMPOSITE_DIM}"
        )));
    }
    let mut prog = CouplingProgram::new(sense, cost(d), vec![d; 4])
        .with_marginal(vec![0], rho.clone(), false)
        .with_marginal(vec![1], rho.clone(), false)
        .with_marginal(vec![2], sigma.clone(), false)
        .with_marginal(vec![3], sigma.clone(), false)
        .with_ppt_cut(vec![0, 1]);
    for k in 0..4 {
        prog = prog.with_ppt_cut(vec![k]);
    }
    if enforce_symmetric {
        prog = prog
            .with_symmetric_block(vec![0, 1])
            .with_symmetric_block(vec![2, 3]);
    }
    Ok(prog)
}

/// `S_p = S^(0,2) S^(1,3)`, the swap of the two groups.
fn group_swap(d: usize) -> Hermitian {
    Hermitian::from_hermitian_part(
        &swap_parties(d, 4, 0, 2)
            .matrix()
            .matmul(swap_parties(d, 4, 1, 3).matrix()),
    )
}

/// `O = (I - S^(0,2)) (I - S^(1,3))`.
fn distance_operator(d: usize) -> Hermitian {
    let id = Hermitian::identity(d.pow(4));
    let a = id.sub(&swap_parties(d, 4, 0, 2));
    let b = id.sub(&swap_parties(d, 4, 1, 3));
    Hermitian::from_hermitian_part(&a.matrix().matmul(b.matrix()))
}

/// `max Tr(X S_p)` over PPT-relaxed four-party couplings; an upper bound on
/// the separable value. The symmetric-subspace equalities are optional.
pub fn p_swap_fidelity(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    p: usize,
    enforce_symmetric: bool,
    settings: &SolverSettings,
) -> Result<DistanceReport, MetricsError> {
    let prog = program(
        rho,
        sigma,
        p,
        Sense::Maximize,
        group_swap,
        enforce_symmetric,
    )?;
    let tag = if enforce_symmetric {
        "p-swap-fidelity-ppt symmetric"
    } else {
        "p-swap-fidelity-ppt"
    };
    Ok(Solved::run(&prog, settings)?.report(Relaxation::Above, tag))
}

/// `[min Tr(X O)]^(2/p)` over PPT-relaxed four-party couplings, reported as
/// the solver's certified interval.
///
/// On a pure product `psi⊗psi⊗phi⊗phi` the integrand is `(1 - |<psi|phi>|^2)^p`,
/// so this is the pure-state p-distance with `p` replaced by `2p`; the method
/// tag records the convention.
pub fn bsf_p_distance_sq(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    p: usize,
    settings: &SolverSettings,
) -> Result<DistanceReport, MetricsError> {
    let prog = program(rho, sigma, p, Sense::Minimize, distance_operator, false)?;
    let solved = Solved::run(&prog, settings)?;
    let exponent = 2.0 / p as f64;
    let lift = |v: f64| v.max(0.0).powf(exponent);
    let mut report = solved.report(
        Relaxation::None,
        "bsf-p [min Tr(X O)]^(2/p), O-based convention",
    );
    let (lo, hi) = report.solves[0].value_interval;
    report.value = lift(report.value);
    report.bound =
        super::BoundKind::Interval(lift(lo).min(report.value), lift(hi).max(report.value));
    Ok(report)
}
