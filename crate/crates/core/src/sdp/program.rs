//! Coupling programs and their affine constraint systems.

use num_complex::Complex64;

use super::SdpError;
use crate::linalg::{embed_operator, hermitian_eig, symmetric_projector, CMatrix, Hermitian};
use crate::states::DensityMatrix;

/// Relative eigenvalue cutoff when orthonormalising the constraint Gram matrix.
const GRAM_RANK_TOL: f64 = 1e-10;
/// Largest tolerated right-hand side along a dependent constraint direction.
const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Reduced state of the coupling on `parties` (strictly increasing) must equal
/// `target`, or `target^T` when `transpose` is set.
#[derive(Clone, Debug)]
pub struct MarginalSpec {
    pub parties: Vec<usize>,
    pub target: DensityMatrix,
    pub transpose: bool,
}

impl MarginalSpec {
    pub fn new(parties: Vec<usize>, target: DensityMatrix, transpose: bool) -> Self {
        Self {
            parties,
            target,
            transpose,
        }
    }

    /// The operator the marginal is actually pinned to.
    pub fn effective_target(&self) -> DensityMatrix {
        if self.transpose {
            self.target.transpose()
        } else {
            self.target.clone()
        }
    }
}

/// `Tr(op X) = rhs`.
#[derive(Clone, Debug)]
pub struct LinearConstraint {
    pub op: Hermitian,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct CouplingProgram {
    pub sense: Sense,
    pub cost: Hermitian,
    pub party_dims: Vec<usize>,
    pub marginals: Vec<MarginalSpec>,
    pub equalities: Vec<LinearConstraint>,
    /// Each entry is a party subset whose partial transpose must be PSD.
    pub ppt_cuts: Vec<Vec<usize>>,
    /// Each entry is a party subset on which `Tr[(P_sym ⊗ I) X] = 1`.
    pub symmetric_blocks: Vec<Vec<usize>>,
}

impl CouplingProgram {
    pub fn new(sense: Sense, cost: Hermitian, party_dims: Vec<usize>) -> Self {
        Self {
            sense,
            cost,
            party_dims,
            marginals: Vec::new(),
            equalities: Vec::new(),
            ppt_cuts: Vec::new(),
            symmetric_blocks: Vec::new(),
        }
    }

    pub fn with_marginal(
        mut self,
        parties: Vec<usize>,
        target: DensityMatrix,
        transpose: bool,
    ) -> Self {
        self.marginals
            .push(MarginalSpec::new(parties, target, transpose));
        self
    }

    pub fn with_equality(mut self, op: Hermitian, rhs: f64) -> Self {
        self.equalities.push(LinearConstraint { op, rhs });
        self
    }

    pub fn with_ppt_cut(mut self, parties: Vec<usize>) -> Self {
        self.ppt_cuts.push(parties);
        self
    }

    pub fn with_symmetric_block(mut self, parties: Vec<usize>) -> Self {
        self.symmetric_blocks.push(parties);
        self
    }

    pub fn total_dim(&self) -> usize {
        self.party_dims.iter().product()
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        let dims = &self.party_dims;
        if dims.is_empty() || dims.contains(&0) {
            return Err(SdpError::Program(
                "party dimensions must be positive".into(),
            ));
        }
        let total = self.total_dim();
        if self.cost.dim() != total {
            return Err(SdpError::Program(format!(
                "cost has dimension {} but parties give {}",
                self.cost.dim(),
                total
            )));
        }
        let n = dims.len();
        for m in &self.marginals {
            check_party_list(&m.parties, n, "marginal")?;
            let want: usize = m.parties.iter().map(|&p| dims[p]).product();
            if m.target.dim() != want {
                return Err(SdpError::Program(format!(
                    "marginal on parties {:?} needs dimension {} but target has {}",
                    m.parties,
                    want,
                    m.target.dim()
                )));
            }
        }
        for e in &self.equalities {
            if e.op.dim() != total || !e.rhs.is_finite() {
                return Err(SdpError::Program(
                    "equality constraint has wrong dimension".into(),
                ));
            }
        }
        for cut in &self.ppt_cuts {
            check_party_list(cut, n, "PPT cut")?;
            if cut.len() == n {
                return Err(SdpError::Program(
                    "PPT cut must leave at least one party out".into(),
                ));
            }
        }
        for block in &self.symmetric_blocks {
            check_party_list(block, n, "symmetric block")?;
            if block.len() < 2 || block.iter().any(|&p| dims[p] != dims[block[0]]) {
                return Err(SdpError::Program(
                    "symmetric block needs two or more parties of equal dimension".into(),
                ));
            }
        }
        Ok(())
    }
}

fn check_party_list(parties: &[usize], n: usize, what: &str) -> Result<(), SdpError> {
    if parties.is_empty()
        || parties.windows(2).any(|w| w[0] >= w[1])
        || parties.iter().any(|&p| p >= n)
    {
        return Err(SdpError::Program(format!(
            "{what} parties {parties:?} must be strictly increasing and in range"
        )));
    }
    Ok(())
}

/// Orthonormal Hermitian basis of `m x m` matrices under `Re Tr(A^dagger B)`.
pub(crate) fn hermitian_basis(m: usize) -> Vec<CMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(m * m);
    for j in 0..m {
        let mut e = CMatrix::zeros(m, m);
        e[(j, j)] = Complex64::new(1.0, 0.0);
        out.push(e);
    }
    for j in 0..m {
        for k in (j + 1)..m {
            let mut re = CMatrix::zeros(m, m);
            re[(j, k)] = Complex64::new(h, 0.0);
            re[(k, j)] = Complex64::new(h, 0.0);
            out.push(re);
            let mut im = CMatrix::zeros(m, m);
            im[(j, k)] = Complex64::new(0.0, -h);
            im[(k, j)] = Complex64::new(0.0, h);
            out.push(im);
        }
    }
    out
}

/// Orthonormalised affine system `<Q_i, X> = b_i`, `i = 1..len`.
#[derive(Clone, Debug)]
pub struct AffineSystem {
    pub basis: Vec<CMatrix>,
    pub rhs: Vec<f64>,
}

impl AffineSystem {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Orthonormalises raw constraints `(A_a, b_a)`; fails if a linear
    /// dependency among the `A_a` is not matched by the `b_a`.
    pub fn from_raw(ops: &[CMatrix], rhs: &[f64]) -> Result<Self, SdpError> {
        let k = ops.len();
        if k == 0 {
            return Ok(Self {
                basis: Vec::new(),
                rhs: Vec::new(),
            });
        }
        let gram = CMatrix::from_fn(k, k, |a, b| Complex64::new(ops[a].inner(&ops[b]), 0.0));
        let eig = hermitian_eig(&Hermitian::from_hermitian_part(&gram))?;
        let cutoff = GRAM_RANK_TOL * eig.max_value().max(f64::MIN_POSITIVE);
        let rhs_scale = rhs.iter().fold(1.0_f64, |m, b| m.max(b.abs()));
        let (mut basis, mut out_rhs) = (Vec::new(), Vec::new());
        for (i, &lam) in eig.values.iter().enumerate() {
            let u: Vec<f64> = (0..k).map(|a| eig.vectors[(a, i)].re).collect();
            let proj_b: f64 = u.iter().zip(rhs).map(|(x, b)| x * b).sum();
            if lam <= cutoff {
                if proj_b.abs() > CONSISTENCY_TOL * rhs_scale {
                    return Err(SdpError::Infeasible(proj_b.abs()));
                }
                continue;
            }
            let s = 1.0 / lam.sqrt();
            let mut q = CMatrix::zeros(ops[0].rows(), ops[0].cols());
            for (a, op) in ops.iter().enumerate() {
                if u[a] != 0.0 {
                    q.axpy(u[a] * s, op);
                }
            }
            basis.push(q.hermitian_part());
            out_rhs.push(proj_b * s);
        }
        Ok(Self {
            basis,
            rhs: out_rhs,
        })
    }

    /// Projects `z` onto `{X : <Q_i, X> = b_i}`.
    pub fn project(&self, z: &mut CMatrix) {
        for (q, &b) in self.basis.iter().zip(&self.rhs) {
            let c = q.inner(z) - b;
            z.axpy(-c, q);
        }
    }

    /// Coefficients `<Q_i, Z>`.
    pub fn coefficients(&self, z: &CMatrix) -> Vec<f64> {
        self.basis.iter().map(|q| q.inner(z)).collect()
    }

    /// Component of `z` orthogonal to the constraint span.
    pub fn orthogonal_part(&self, z: &CMatrix) -> CMatrix {
        let mut out = z.clone();
        for q in &self.basis {
            let c = q.inner(&out);
            out.axpy(-c, q);
        }
        out
    }

    /// Largest `|<Q_i, X> - b_i|`.
    pub fn residual(&self, x: &CMatrix) -> f64 {
        self.basis
            .iter()
            .zip(&self.rhs)
            .map(|(q, &b)| (q.inner(x) - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Raw (not yet orthonormalised) constraints for a set of marginals.
pub(crate) fn raw_marginal_constraints(
    party_dims: &[usize],
    marginals: &[MarginalSpec],
) -> Result<(Vec<CMatrix>, Vec<f64>), SdpError> {
    let (mut ops, mut rhs) = (Vec::new(), Vec::new());
    for m in marginals {
        let target = m.effective_target();
        for e in hermitian_basis(target.dim()) {
            rhs.push(e.inner(target.matrix()));
            ops.push(embed_operator(&e, party_dims, &m.parties)?);
        }
    }
    Ok((ops, rhs))
}

/// `P_sym` on `block`, identity elsewhere.
pub(crate) fn symmetric_block_operator(
    party_dims: &[usize],
    block: &[usize],
) -> Result<CMatrix, SdpError> {
    let p = symmetric_projector(party_dims[block[0]], block.len());
    Ok(embed_operator(p.matrix(), party_dims, block)?)
}

/// Independent affine constraints imposed by `marginals`, orthonormalised so
/// that redundant conditions such as the doubled trace condition drop out.
pub fn build_marginal_constraints(
    party_dims: &[usize],
    marginals: &[MarginalSpec],
) -> Result<AffineSystem, SdpError> {
    let n = party_dims.len();
    for m in marginals {
        check_party_list(&m.parties, n, "marginal")?;
        let want: usize = m.parties.iter().map(|&p| party_dims[p]).product();
        if m.target.dim() != want {
            return Err(SdpError::Program(format!(
                "marginal on parties {:?} needs dimension {}",
                m.parties, want
            )));
        }
    }
    let (ops, rhs) = raw_marginal_constraints(party_dims, marginals)?;
    AffineSystem::from_raw(&ops, &rhs)
}

/// Every equality of `program` (marginals, explicit, symmetric blocks) as one
/// orthonormalised system.
pub fn build_affine_system(program: &CouplingProgram) -> Result<AffineSystem, SdpError> {
    program.validate()?;
    let (mut ops, mut rhs) = raw_marginal_constraints(&program.party_dims, &program.marginals)?;
    for e in &program.equalities {
        ops.push(e.op.matrix().clone());
        rhs.push(e.rhs);
    }
    for block in &program.symmetric_blocks {
        ops.push(symmetric_block_operator(&program.party_dims, block)?);
        rhs.push(1.0);
    }
    AffineSystem::from_raw(&ops, &rhs)
}
