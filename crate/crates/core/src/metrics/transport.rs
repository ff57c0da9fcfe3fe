//! Two-party coupling programs: the Wasserstein-type distances, the SWAP
//! fidelity and the quantities derived from them.

use super::closed::{euclid_sq, skew_information};
use super::{
    qfi, BoundKind, ConeKind, DistanceReport, Formulation, MetricsError, ObservableSet,
    SolveDiagnostics, NEGATIVE_CLIP,
};
use crate::linalg::{swap_operator, CMatrix, Hermitian};
use crate::sdp::{solve, CouplingProgram, Sense, SolverSettings, Status};
use crate::states::DensityMatrix;

/// Direction in which a PPT-relaxed value can miss the separable one.
#[derive(Clone, Copy, PartialEq, Eq)]
pub(super) enum Relaxation {
    /// The computed number is the true value.
    None,
    Below,
    Above,
}

/// One solved program, possibly mapped through `a + b * value`.
pub(super) struct Solved {
    pub value: f64,
    pub interval: (f64, f64),
    pub diag: SolveDiagnostics,
    pub coupling: Hermitian,
}

impl Solved {
    pub fn run(program: &CouplingProgram, settings: &SolverSettings) -> Result<Self, MetricsError> {
        let r = solve(program, settings)?;
        if r.status == Status::Infeasible {
            return Err(MetricsError::Infeasible);
        }
        Ok(Self {
            value: r.value,
            interval: r.value_interval,
            diag: SolveDiagnostics::from(&r),
            coupling: r.optimizer,
        })
    }

    pub fn map(mut self, a: f64, b: f64) -> Self {
        let (lo, hi) = (a + b * self.interval.0, a + b * self.interval.1);
        self.value = a + b * self.value;
        self.interval = (lo.min(hi), lo.max(hi));
        self
    }

    pub fn report(self, relaxation: Relaxation, method: impl Into<String>) -> DistanceReport {
        let bound = if self.diag.status != Status::Converged {
            BoundKind::Interval(self.interval.0, self.interval.1)
        } else {
            match relaxation {
                Relaxation::None => BoundKind::Exact,
                Relaxation::Below => BoundKind::LowerBound,
                Relaxation::Above => BoundKind::UpperBound,
            }
        };
        DistanceReport {
            value: self.value,
            bound,
            method: method.into(),
            coupling: Some(self.coupling),
            solves: vec![self.diag],
        }
    }
}

fn same_dim(a: usize, b: usize) -> Result<(), MetricsError> {
    if a == b {
        Ok(())
    } else {
        Err(MetricsError::Dimension(a, b))
    }
}

/// `relaxed` unless the PPT cone is exact (all couplings, or two qubits).
fn relaxation(cone: ConeKind, d: usize, relaxed: Relaxation) -> Relaxation {
    if cone == ConeKind::All || d == 2 {
        Relaxation::None
    } else {
        relaxed
    }
}

fn cone_tag(cone: ConeKind) -> &'static str {
    match cone {
        ConeKind::All => "all",
        ConeKind::Ppt => "ppt",
    }
}

/// `1/2 sum_n (A_n ⊗ I - I ⊗ H_n)^2` with `A_n = H_n^T` or `H_n`.
fn transport_cost(obs: &ObservableSet, transpose_first: bool) -> Hermitian {
    let d = obs.dim();
    let id = CMatrix::identity(d);
    let mut total = CMatrix::zeros(d * d, d * d);
    for h in obs.ops() {
        let first = if transpose_first {
            h.matrix().transpose()
        } else {
            h.matrix().clone()
        };
        let diff = &crate::linalg::kron(&first, &id) - &crate::linalg::kron(&id, h.matrix());
        total += &diff.matmul(&diff);
    }
    Hermitian::from_hermitian_part(&total.scale(0.5))
}

/// Builds the two-party distance program. With [`Formulation::Dpt`] the first
/// party carries `rho^T` and `H_n^T`, the second `sigma` and `H_n`; with
/// [`Formulation::Gmpc`] everything is plain.
pub fn distance_program(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    obs: &ObservableSet,
    formulation: Formulation,
    cone: ConeKind,
) -> CouplingProgram {
    let d = obs.dim();
    let transposed = formulation == Formulation::Dpt;
    let mut p = CouplingProgram::new(Sense::Minimize, transport_cost(obs, transposed), vec![d, d])
        .with_marginal(vec![0], rho.clone(), transposed)
        .with_marginal(vec![1], sigma.clone(), false);
    if cone == ConeKind::Ppt {
        p = p.with_ppt_cut(vec![0]);
    }
    p
}

/// Squared two-party Wasserstein-type distance over all or PPT couplings.
/// The PPT value is a lower bound on the separable one for `d >= 3`.
pub fn dpt_distance_sq(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    obs: &ObservableSet,
    formulation: Formulation,
    cone: ConeKind,
    settings: &SolverSettings,
) -> Result<DistanceReport, MetricsError> {
    same_dim(rho.dim(), sigma.dim())?;
    same_dim(rho.dim(), obs.dim())?;
    let program = distance_program(rho, sigma, obs, formulation, cone);
    let tag = match formulation {
        Formulation::Dpt => "dpt",
        Formulation::Gmpc => "gmpc",
    };
    let solved = Solved::run(&program, settings)?;
    Ok(solved.report(
        relaxation(cone, rho.dim(), Relaxation::Below),
        format!("{tag}-{}", cone_tag(cone)),
    ))
}

/// Squared self-distance. All couplings: `sum_n I_rho(H_n)`. PPT with a
/// single observable: `F_Q / 4`. Otherwise the SDP with equal marginals.
pub fn self_distance_sq(
    rho: &DensityMatrix,
    obs: &ObservableSet,
    cone: ConeKind,
    settings: &SolverSettings,
) -> Result<DistanceReport, MetricsError> {
    same_dim(rho.dim(), obs.dim())?;
    match cone {
        ConeKind::All => {
            let mut total = 0.0;
            for h in obs.ops() {
                total += skew_information(rho, h)?;
            }
            Ok(DistanceReport::closed_form(
                total,
                "self-all skew information",
            ))
        }
        ConeKind::Ppt if obs.len() == 1 => Ok(DistanceReport::closed_form(
            qfi(rho, &obs.ops()[0])? / 4.0,
            "self-ppt qfi/4",
        )),
        ConeKind::Ppt => dpt_distance_sq(rho, rho, obs, Formulation::Dpt, cone, settings),
    }
}

/// `D^2(rho, sigma) - [D^2(rho, rho) + D^2(sigma, sigma)] / 2` on the chosen
/// cone. Values in `[-NEGATIVE_CLIP, 0)` are clipped to zero; anything lower
/// is an error, since the self-distance bound forbids it.
pub fn modified_dpt_sq(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    obs: &ObservableSet,
    cone: ConeKind,
    settings: &SolverSettings,
) -> Result<DistanceReport, MetricsError> {
    let cross = dpt_distance_sq(rho, sigma, obs, Formulation::Dpt, cone, settings)?;
    let self_rho = self_distance_sq(rho, obs, cone, settings)?;
    let self_sigma = self_distance_sq(sigma, obs, cone, settings)?;
    let raw = cross.value - 0.5 * (self_rho.value + self_sigma.value);
    if raw < -NEGATIVE_CLIP {
        return Err(MetricsError::Negative(raw));
    }
    let value = raw.max(0.0);

    let interval_of = |r: &DistanceReport| match r.bound {
        BoundKind::Interval(lo, hi) => (lo, hi),
        _ => r
            .solves
            .first()
            .map_or((r.value, r.value), |s| s.value_interval),
    };
    let (c, a, b) = (
        interval_of(&cross),
        interval_of(&self_rho),
        interval_of(&self_sigma),
    );
    let lo = c.0 - 0.5 * (a.1 + b.1);
    let hi = c.1 - 0.5 * (a.0 + b.0);
    let interval = BoundKind::Interval(lo.min(value), hi.max(value));

    let all_exact = [&cross, &self_rho, &self_sigma]
        .iter()
        .all(|r| r.bound == BoundKind::Exact);
    let bound = if all_exact {
        BoundKind::Exact
    } else if cross.bound == BoundKind::LowerBound
        && self_rho.bound == BoundKind::Exact
        && self_sigma.bound == BoundKind::Exact
    {
        BoundKind::LowerBound
    } else {
        // relaxed self-distances enter with a minus sign: no one-sided statement
        interval
    };
    let mut solves = cross.solves;
    solves.extend(self_rho.solves);
    solves.extend(self_sigma.solves);
    Ok(DistanceReport {
        value,
        bound,
        method: format!("modified-dpt-{}", cone_tag(cone)),
        coupling: cross.coupling,
        solves,
    })
}

/// `max Tr(X S)` over couplings with marginals `rho`, `sigma`. The PPT value
/// is an upper bound on the separable one for `d >= 3`.
pub fn swap_fidelity(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    cone: ConeKind,
    settings: &SolverSettings,
) -> Result<DistanceReport, MetricsError> {
    Ok(swap_fidelity_solved(rho, sigma, cone, settings)?.report(
        relaxation(cone, rho.dim(), Relaxation::Above),
        format!("swap-fidelity-{}", cone_tag(cone)),
    ))
}

fn swap_fidelity_solved(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    cone: ConeKind,
    settings: &SolverSettings,
) -> Result<Solved, MetricsError> {
    same_dim(rho.dim(), sigma.dim())?;
    let d = rho.dim();
    let mut p = CouplingProgram::new(Sense::Maximize, swap_operator(d), vec![d, d])
        .with_marginal(vec![0], rho.clone(), false)
        .with_marginal(vec![1], sigma.clone(), false);
    if cone == ConeKind::Ppt {
        p = p.with_ppt_cut(vec![0]);
    }
    Solved::run(&p, settings)
}

/// `(1 - F_S) / 2`.
pub fn swap_distance_sq(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    cone: ConeKind,
    settings: &SolverSettings,
) -> Result<DistanceReport, MetricsError> {
    Ok(swap_fidelity_solved(rho, sigma, cone, settings)?
        .map(0.5, -0.5)
        .report(
            relaxation(cone, rho.dim(), Relaxation::Below),
            format!("swap-distance-{}", cone_tag(cone)),
        ))
}

/// `1 - F_S` over PPT couplings.
pub fn bsf_distance_sq(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    settings: &SolverSettings,
) -> Result<DistanceReport, MetricsError> {
    Ok(swap_fidelity_solved(rho, sigma, ConeKind::Ppt, settings)?
        .map(1.0, -1.0)
        .report(
            relaxation(ConeKind::Ppt, rho.dim(), Relaxation::Below),
            "bsf2 1 - swap-fidelity-ppt",
        ))
}

/// Distance over decompositions into pure product states.
///
/// One or two observables: the Euclidean distance, exactly. A full set:
/// `2 (1 - F_S)` on PPT couplings. Anything else: an interval from the
/// Euclidean distance up to the modified PPT distance, reported at its midpoint.
pub fn decomp_distance_sq(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    obs: &ObservableSet,
    settings: &SolverSettings,
) -> Result<DistanceReport, MetricsError> {
    same_dim(rho.dim(), sigma.dim())?;
    same_dim(rho.dim(), obs.dim())?;
    let e = euclid_sq(rho, sigma, obs)?;
    if obs.len() <= 2 {
        return Ok(DistanceReport::closed_form(e, "decomp euclidean"));
    }
    if obs.is_full_set() {
        return Ok(swap_fidelity_solved(rho, sigma, ConeKind::Ppt, settings)?
            .map(2.0, -2.0)
            .report(
                relaxation(ConeKind::Ppt, rho.dim(), Relaxation::Below),
                "decomp 2(1 - swap-fidelity-ppt)",
            ));
    }
    let upper = modified_dpt_sq(rho, sigma, obs, ConeKind::Ppt, settings)?;
    let hi = upper.value.max(e);
    Ok(DistanceReport {
        value: 0.5 * (e + hi),
        bound: BoundKind::Interval(e, hi),
        method: "decomp [euclidean, modified-dpt-ppt]".into(),
        coupling: None,
        solves: upper.solves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{delta_sq, uhlmann_fidelity};
    use crate::states::{random_density_hs, random_pure, SeedSpec};

    fn settings() -> SolverSettings {
        SolverSettings::default()
    }

    fn worked_example() -> (DensityMatrix, DensityMatrix, ObservableSet) {
        (
            DensityMatrix::maximally_mixed(2),
            DensityMatrix::basis(2, 0),
            ObservableSet::z(2),
        )
    }

    #[test]
    fn worked_example_values() {
        let (rho, sigma, z) = worked_example();
        let r = dpt_distance_sq(
            &rho,
            &sigma,
            &z,
            Formulation::Dpt,
            ConeKind::Ppt,
            &settings(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-5, "{}", r.value);
        assert_eq!(r.bound, BoundKind::Exact);
        let m = modified_dpt_sq(&rho, &sigma, &z, ConeKind::Ppt, &settings()).unwrap();
        assert!((m.value - 1.0).abs() < 1e-5);
        let dec = decomp_distance_sq(&rho, &sigma, &z, &settings()).unwrap();
        assert_eq!(dec.value, 0.5);
        assert_eq!(dec.bound, BoundKind::Exact);
    }

    #[test]
    fn pure_pairs_give_delta() {
        for d in [2, 3] {
            let obs = ObservableSet::su(d);
            let psi = random_pure(d, SeedSpec::new(20, 0)).density();
            let phi = random_pure(d, SeedSpec::new(20, 1)).density();
            let want = delta_sq(&psi, &phi, &obs).unwrap();
            for f in [Formulation::Dpt, Formulation::Gmpc] {
                for cone in [ConeKind::All, ConeKind::Ppt] {
                    let r = dpt_distance_sq(&psi, &phi, &obs, f, cone, &settings()).unwrap();
                    assert!(
                        (r.value - want).abs() < 1e-5,
                        "{f:?} {cone:?} {} {want}",
                        r.value
                    );
                }
            }
        }
    }

    #[test]
    fn self_distance_all_matches_sdp() {
        let rho = random_density_hs(3, SeedSpec::new(21, 0));
        let obs = ObservableSet::su(3);
        let closed = self_distance_sq(&rho, &obs, ConeKind::All, &settings()).unwrap();
        let sdp = dpt_distance_sq(
            &rho,
            &rho,
            &obs,
            Formulation::Dpt,
            ConeKind::All,
            &settings(),
        )
        .unwrap();
        assert!(
            (closed.value - sdp.value).abs() < 1e-5,
            "{} {}",
            closed.value,
            sdp.value
        );
    }

    #[test]
    fn self_distance_single_observable_matches_sdp() {
        // qubit: the PPT program is exact, so qfi/4 must agree with it
        let rho = random_density_hs(2, SeedSpec::new(22, 0));
        let obs = ObservableSet::z(2);
        let closed = self_distance_sq(&rho, &obs, ConeKind::Ppt, &settings()).unwrap();
        let sdp = dpt_distance_sq(
            &rho,
            &rho,
            &obs,
            Formulation::Dpt,
            ConeKind::Ppt,
            &settings(),
        )
        .unwrap();
        assert!(
            (closed.value - sdp.value).abs() < 1e-5,
            "{} {}",
            closed.value,
            sdp.value
        );
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(
            self_distance_sq(&mixed, &obs, ConeKind::Ppt, &settings())
                .unwrap()
                .value
                .abs()
                < 1e-14
        );
    }

    #[test]
    fn full_set_self_distance_is_constant() {
        for d in [2, 3] {
            let rho = random_density_hs(d, SeedSpec::new(23, d as u64));
            let r =
                self_distance_sq(&rho, &ObservableSet::su(d), ConeKind::Ppt, &settings()).unwrap();
            assert!(
                (r.value - 2.0 * (d as f64 - 1.0)).abs() < 1e-5,
                "{}",
                r.value
            );
        }
    }

    #[test]
    fn modified_distance_of_equal_states_is_zero() {
        let rho = random_density_hs(2, SeedSpec::new(24, 0));
        let r = modified_dpt_sq(
            &rho,
            &rho,
            &ObservableSet::su(2),
            ConeKind::Ppt,
            &settings(),
        )
        .unwrap();
        assert!(r.value.abs() < 1e-5);
    }

    #[test]
    fn qubit_modified_distance_is_two_minus_two_f() {
        let rho = random_density_hs(2, SeedSpec::new(25, 0));
        let sigma = random_density_hs(2, SeedSpec::new(25, 1));
        let r = modified_dpt_sq(
            &rho,
            &sigma,
            &ObservableSet::su(2),
            ConeKind::Ppt,
            &settings(),
        )
        .unwrap();
        let f = uhlmann_fidelity(&rho, &sigma).unwrap();
        assert!((r.value - (2.0 - 2.0 * f)).abs() < 1e-4);
    }

    #[test]
    fn swap_fidelity_examples() {
        let psi = random_pure(3, SeedSpec::new(26, 0));
        let phi = random_pure(3, SeedSpec::new(26, 1));
        for cone in [ConeKind::All, ConeKind::Ppt] {
            let r = swap_fidelity(&psi.density(), &phi.density(), cone, &settings()).unwrap();
            assert!((r.value - psi.overlap(&phi)).abs() < 1e-6);
        }
        let rho = random_density_hs(2, SeedSpec::new(26, 2));
        let sigma = random_density_hs(2, SeedSpec::new(26, 3));
        let r = swap_fidelity(&rho, &sigma, ConeKind::Ppt, &settings()).unwrap();
        assert!((r.value - uhlmann_fidelity(&rho, &sigma).unwrap()).abs() < 1e-5);
        assert_eq!(r.bound, BoundKind::Exact);
        let rho = random_density_hs(3, SeedSpec::new(26, 4));
        let sigma = random_density_hs(3, SeedSpec::new(26, 5));
        let r = swap_fidelity(&rho, &sigma, ConeKind::Ppt, &settings()).unwrap();
        assert_eq!(r.bound, BoundKind::UpperBound);
        let f = uhlmann_fidelity(&rho, &sigma).unwrap();
        assert!(f - 1e-5 <= r.value && r.value <= f.sqrt() + 1e-5);
    }

    #[test]
    fn swap_distance_matches_direct_minimisation() {
        let rho = random_density_hs(3, SeedSpec::new(27, 0));
        let sigma = random_density_hs(3, SeedSpec::new(27, 1));
        let r = swap_distance_sq(&rho, &sigma, ConeKind::All, &settings()).unwrap();
        let cs = Hermitian::identity(9).sub(&swap_operator(3)).scale(0.5);
        let p = CouplingProgram::new(Sense::Minimize, cs, vec![3, 3])
            .with_marginal(vec![0], rho.clone(), false)
            .with_marginal(vec![1], sigma.clone(), false);
        let direct = solve(&p, &settings()).unwrap();
        assert!((r.value - direct.value).abs() < 1e-6);
        let zero = DensityMatrix::basis(3, 0);
        let one = DensityMatrix::basis(3, 1);
        assert!(
            swap_distance_sq(&zero, &zero, ConeKind::Ppt, &settings())
                .unwrap()
                .value
                .abs()
                < 1e-9
        );
        assert!(
            (swap_distance_sq(&zero, &one, ConeKind::Ppt, &settings())
                .unwrap()
                .value
                - 0.5)
                .abs()
                < 1e-9
        );
    }

    #[test]
    fn bsf_examples() {
        let rho = random_density_hs(2, SeedSpec::new(28, 0));
        let sigma = random_density_hs(2, SeedSpec::new(28, 1));
        let r = bsf_distance_sq(&rho, &sigma, &settings()).unwrap();
        assert!((r.value - (1.0 - uhlmann_fidelity(&rho, &sigma).unwrap())).abs() < 1e-5);
        let psi = random_pure(3, SeedSpec::new(28, 2)).density();
        let sigma = random_density_hs(3, SeedSpec::new(28, 3));
        let r = bsf_distance_sq(&psi, &sigma, &settings()).unwrap();
        let want = 1.0 - psi.operator().trace_product(sigma.operator());
        assert!((r.value - want).abs() < 1e-5, "{} {want}", r.value);
    }

    #[test]
    fn decomp_full_set_qubit() {
        let rho = random_density_hs(2, SeedSpec::new(29, 0));
        let sigma = random_density_hs(2, SeedSpec::new(29, 1));
        let r = decomp_distance_sq(&rho, &sigma, &ObservableSet::su(2), &settings()).unwrap();
        let f = uhlmann_fidelity(&rho, &sigma).unwrap();
        assert!((r.value - 2.0 * (1.0 - f)).abs() < 1e-4);
        assert!(r.value <= 2.0 + 1e-9);
    }

    #[test]
    fn decomp_partial_set_is_an_interval() {
        let rho = random_density_hs(3, SeedSpec::new(30, 0));
        let sigma = random_density_hs(3, SeedSpec::new(30, 1));
        let obs = ObservableSet::new(ObservableSet::su(3).ops()[..3].to_vec()).unwrap();
        let r = decomp_distance_sq(&rho, &sigma, &obs, &settings()).unwrap();
        let BoundKind::Interval(lo, hi) = r.bound else {
            panic!("expected an interval")
        };
        assert!(lo <= r.value && r.value <= hi);
        assert!((lo - euclid_sq(&rho, &sigma, &obs).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn decomp_upper_bound_dominates_ppt_value() {
        let rho = random_density_hs(3, SeedSpec::new(31, 0));
        let sigma = random_density_hs(3, SeedSpec::new(31, 1));
        let obs = ObservableSet::su(3);
        let ub = crate::metrics::decomp_upper_bound(&rho, &sigma, &obs).unwrap();
        let r = dpt_distance_sq(
            &rho,
            &sigma,
            &obs,
            Formulation::Dpt,
            ConeKind::Ppt,
            &settings(),
        )
        .unwrap();
        assert!(r.value <= ub + 1e-6);
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let a = DensityMatrix::maximally_mixed(2);
        let b = DensityMatrix::maximally_mixed(3);
        assert!(swap_fidelity(&a, &b, ConeKind::All, &settings()).is_err());
        assert!(dpt_distance_sq(
            &a,
            &a,
            &ObservableSet::su(3),
            Formulation::Dpt,
            ConeKind::All,
            &settings()
        )
        .is_err());
    }
}
