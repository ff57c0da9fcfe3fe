//! Semidefinite programs over couplings.
//!
//! A [`CouplingProgram`] extremises `Tr(C X)` over Hermitian `X` subject to
//! marginal and other affine equalities, `X >= 0`, and optionally
//! `T_P(X) >= 0` for partial transposes over chosen party subsets. [`solve`]
//! runs a consensus ADMM: one block projects onto the affine set, one block
//! per cone projects by eigenvalue clipping. Results carry a certified value
//! interval built from the dual iterates and, when a strictly feasible
//! reference point is known, from a feasible primal point.

mod anderson;
mod program;
mod solver;

pub use program::{
    build_affine_system, build_marginal_constraints, AffineSystem, CouplingProgram,
    LinearConstraint, MarginalSpec, Sense,
};
pub use solver::solve;

use thiserror::Error;

use crate::linalg::{
    hermitian_eig, partial_trace, partial_transpose, CMatrix, Hermitian, LinalgError,
};

#[derive(Debug, Error)]
pub enum SdpError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("malformed program: {0}")]
    Program(String),
    #[error("equality constraints are inconsistent (residual {0:.3e})")]
    Infeasible(f64),
    #[error("solution has dimension {got}, program needs {want}")]
    Dimension { got: usize, want: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub tol_gap: f64,
    pub max_iter: usize,
    /// Over-relaxation factor in `(0, 2)`.
    pub alpha: f64,
    /// Initial penalty.
    pub rho: f64,
    pub adaptive_rho: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol_primal: 1e-7,
            tol_dual: 1e-7,
            tol_gap: 1e-6,
            max_iter: 200_000,
            alpha: 1.6,
            rho: 1.0,
            adaptive_rho: true,
        }
    }
}

impl SolverSettings {
    /// Same settings with all three tolerances scaled to `tol` (gap gets `10 * tol`).
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol_primal = tol;
        self.tol_dual = tol;
        self.tol_gap = 10.0 * tol;
        self
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        let ok = [self.tol_primal, self.tol_dual, self.tol_gap, self.rho]
            .iter()
            .all(|&t| t > 0.0 && t.is_finite())
            && self.alpha > 0.0
            && self.alpha < 2.0
            && self.max_iter > 0;
        if ok {
            Ok(())
        } else {
            Err(SdpError::Program(
                "solver tolerances, penalty and iteration cap must be positive".into(),
            ))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIter,
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct SdpResult {
    pub value: f64,
    pub optimizer: Hermitian,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub value_interval: (f64, f64),
    pub iterations: usize,
    pub status: Status,
}

impl SdpResult {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Constraint residuals of a candidate coupling.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    /// Largest entry of `|Tr_rest X - target|` over all marginal specs.
    pub max_marginal_deviation: f64,
    /// Largest `|Tr(A X) - b|` over explicit and symmetric-block equalities.
    pub max_equality_residual: f64,
    pub min_eigenvalue: f64,
    /// Minimum eigenvalue of each required partial transpose, in cut order.
    pub min_pt_eigenvalues: Vec<f64>,
    pub objective: f64,
}

impl ResidualReport {
    pub fn max_violation(&self) -> f64 {
        let cone = self
            .min_pt_eigenvalues
            .iter()
            .fold(self.min_eigenvalue, |m, &v| m.min(v));
        self.max_marginal_deviation
            .max(self.max_equality_residual)
            .max((-cone).max(0.0))
    }
}

pub fn verify_solution(program: &CouplingProgram, x: &CMatrix) -> Result<ResidualReport, SdpError> {
    program.validate()?;
    let dims = &program.party_dims;
    let want = program.total_dim();
    if !x.is_square() || x.rows() != want {
        return Err(SdpError::Dimension {
            got: x.rows(),
            want,
        });
    }
    let xh = Hermitian::from_hermitian_part(x);
    let mut marg = 0.0_f64;
    for m in &program.marginals {
        let traced: Vec<usize> = (0..dims.len()).filter(|p| !m.parties.contains(p)).collect();
        let reduced = partial_trace(x, dims, &traced)?;
        marg = marg.max(reduced.max_abs_diff(m.effective_target().matrix()));
    }
    let mut eq = 0.0_f64;
    for e in &program.equalities {
        eq = eq.max((e.op.matrix().inner(x) - e.rhs).abs());
    }
    for block in &program.symmetric_blocks {
        let op = program::symmetric_block_operator(dims, block)?;
        eq = eq.max((op.inner(x) - 1.0).abs());
    }
    let min_eigenvalue = hermitian_eig(&xh)?.min_value();
    let mut min_pt_eigenvalues = Vec::with_capacity(program.ppt_cuts.len());
    for cut in &program.ppt_cuts {
        let pt = Hermitian::from_hermitian_part(&partial_transpose(x, dims, cut)?);
        min_pt_eigenvalues.push(hermitian_eig(&pt)?.min_value());
    }
    Ok(ResidualReport {
        max_marginal_deviation: marg,
        max_equality_residual: eq,
        min_eigenvalue,
        min_pt_eigenvalues,
        objective: program.cost.matrix().inner(x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, kron, swap_operator};
    use crate::states::{random_density_hs, DensityMatrix, SeedSpec};

    #[test]
    fn product_coupling_is_feasible() {
        for (d, seed) in [(2, 1), (3, 2), (4, 3)] {
            let rho = random_density_hs(d, SeedSpec::new(seed, 0));
            let sigma = random_density_hs(d, SeedSpec::new(seed, 1));
            let prog = CouplingProgram::new(Sense::Maximize, swap_operator(d), vec![d, d])
                .with_marginal(vec![0], rho.clone(), false)
                .with_marginal(vec![1], sigma.clone(), true)
                .with_ppt_cut(vec![0]);
            let x = kron(rho.matrix(), &sigma.matrix().transpose());
            let rep = verify_solution(&prog, &x).unwrap();
            assert!(rep.max_marginal_deviation <= 1e-12);
            assert!(rep.min_eigenvalue > 0.0 && rep.min_pt_eigenvalues[0] > 0.0);
            assert!(rep.max_violation() <= 1e-12);
        }
    }

    #[test]
    fn singlet_violates_ppt() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = [c64(0.0, 0.0), c64(h, 0.0), c64(-h, 0.0), c64(0.0, 0.0)];
        let singlet = CMatrix::outer(&v, &v);
        let mixed = DensityMatrix::maximally_mixed(2);
        let prog = CouplingProgram::new(Sense::Maximize, swap_operator(2), vec![2, 2])
            .with_marginal(vec![0], mixed.clone(), false)
            .with_marginal(vec![1], mixed, false)
            .with_ppt_cut(vec![0]);
        let rep = verify_solution(&prog, &singlet).unwrap();
        assert!(rep.max_marginal_deviation < 1e-15);
        assert!((rep.min_pt_eigenvalues[0] + 0.5).abs() < 1e-12);
        assert!((rep.objective + 1.0).abs() < 1e-12);
        assert!(rep.min_eigenvalue.abs() < 1e-12);
    }

    #[test]
    fn settings_validation() {
        assert!(SolverSettings::default().validate().is_ok());
        let bad = SolverSettings {
            tol_gap: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverSettings {
            alpha: 2.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
