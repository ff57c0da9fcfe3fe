//! Consensus ADMM with support reduction and certified bounds.
//!
//! Iteration, with `nb` cone blocks `K_0 = PSD`, `K_j = T_j(PSD)`:
//!
//! ```text
//! X    = P_aff( mean_j(Z_j - U_j) - C / (rho nb) )
//! W_j  = alpha X + (1 - alpha) Z_j + U_j
//! Z_j  = P_Kj(W_j)
//! U_j  = W_j - Z_j
//! ```
//!
//! `-rho U_j` always lies in the dual cone `K_j*`, so every iterate yields a
//! valid lower bound on the minimum after a least-squares fit of the equality
//! multipliers; see [`lower_bound`]. Anderson acceleration runs on the
//! stacked `W_j`. Every so often the current `X` is polished into an exactly
//! feasible point by cyclic projections plus a blend toward a strictly
//! feasible reference, which certifies the other side of the interval.

use num_complex::Complex64;

use super::anderson::Anderson;
use super::program::{
    hermitian_basis, symmetric_block_operator, AffineSystem, CouplingProgram, Sense,
};
use super::{SdpError, SdpResult, SolverSettings, Status};
use crate::linalg::{
    embed_operator, hermitian_eig, hermitian_eig_warm, kron, partial_trace,
    partial_transpose_permutation, CMatrix, EigenDecomposition, Hermitian,
};

/// Eigenvalues at or below this are treated as outside a marginal's support.
const SUPPORT_TOL: f64 = 1e-10;
/// Largest trace a marginal target may lose when compressed to the supports.
const COMPRESSION_LOSS_TOL: f64 = 1e-8;
const CHECK_EVERY: usize = 10;
const ADAPT_EVERY: usize = 50;
const ADAPT_RATIO: f64 = 10.0;
const ADAPT_FACTOR: f64 = 2.0;
const AA_MEMORY: usize = 20;
/// An accelerated step is kept only if it does not grow the fixed-point residual by more than this.
const AA_SAFEGUARD: f64 = 1.0;
const POLISH_EVERY: usize = 100;
/// Polishing starts once the ADMM primal residual is below this.
const POLISH_START: f64 = 1e-4;
/// Cyclic projection sweeps used to turn an iterate into a feasible point.
const POLISH_ROUNDS: usize = 100;

/// The program restricted to the tensor product of marginal supports.
struct Reduced {
    dims: Vec<usize>,
    /// Isometry from the compressed space into the original one, if not the identity.
    lift: Option<CMatrix>,
    cost: CMatrix,
    affine: AffineSystem,
    cut_perms: Vec<Vec<usize>>,
    /// A strictly feasible point, when one is known in closed form.
    reference: Option<CMatrix>,
}

fn flatten(blocks: &[CMatrix]) -> Vec<f64> {
    blocks
        .iter()
        .flat_map(|b| b.as_slice().iter().flat_map(|z| [z.re, z.im]))
        .collect()
}

fn unflatten(v: &[f64], nb: usize, dc: usize) -> Vec<CMatrix> {
    let per = 2 * dc * dc;
    (0..nb)
        .map(|j| {
            let data = v[j * per..(j + 1) * per]
                .chunks(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect();
            CMatrix::from_row_major(dc, dc, data).expect("block shape")
        })
        .collect()
}

fn permute(m: &CMatrix, perm: &[usize]) -> CMatrix {
    let data = m.as_slice();
    CMatrix::from_row_major(m.rows(), m.cols(), perm.iter().map(|&k| data[k]).collect())
        .expect("permutation preserves shape")
}

fn local_reduced(spec_dims: &[usize], target: &CMatrix, pos: usize) -> Result<CMatrix, SdpError> {
    let traced: Vec<usize> = (0..spec_dims.len()).filter(|&k| k != pos).collect();
    Ok(partial_trace(target, spec_dims, &traced)?)
}

/// Orthonormal basis of the support of a PSD matrix, or `None` if full rank.
fn support(m: &CMatrix) -> Result<Option<CMatrix>, SdpError> {
    let e = hermitian_eig(&Hermitian::from_hermitian_part(m))?;
    let keep: Vec<usize> = (0..e.dim())
        .filter(|&k| e.values[k] > SUPPORT_TOL)
        .collect();
    if keep.len() == e.dim() {
        return Ok(None);
    }
    if keep.is_empty() {
        return Err(SdpError::Program(
            "marginal target has empty support".into(),
        ));
    }
    Ok(Some(CMatrix::from_fn(e.dim(), keep.len(), |i, j| {
        e.vectors[(i, keep[j])]
    })))
}

fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| kron(&acc, f))
}

fn compress(w: &Option<CMatrix>, a: &CMatrix) -> CMatrix {
    match w {
        Some(w) => w.adjoint_mul(&a.matmul(w)).hermitian_part(),
        None => a.clone(),
    }
}

fn reduce(program: &CouplingProgram) -> Result<Reduced, SdpError> {
    let dims = &program.party_dims;
    let n = dims.len();

    let mut isos: Vec<Option<CMatrix>> = vec![None; n];
    for (k, iso) in isos.iter_mut().enumerate() {
        if let Some(m) = program.marginals.iter().find(|m| m.parties.contains(&k)) {
            let spec_dims: Vec<usize> = m.parties.iter().map(|&p| dims[p]).collect();
            let pos = m.parties.iter().position(|&p| p == k).unwrap();
            *iso = support(&local_reduced(
                &spec_dims,
                m.effective_target().matrix(),
                pos,
            )?)?;
        }
    }
    let factor = |k: usize| {
        isos[k]
            .clone()
            .unwrap_or_else(|| CMatrix::identity(dims[k]))
    };
    let cdims: Vec<usize> = (0..n)
        .map(|k| isos[k].as_ref().map_or(dims[k], |v| v.cols()))
        .collect();
    let lift = if isos.iter().all(Option::is_none) {
        None
    } else {
        Some(kron_all(&(0..n).map(factor).collect::<Vec<_>>()))
    };

    let (mut ops, mut rhs) = (Vec::new(), Vec::new());
    let mut single: Vec<Option<CMatrix>> = vec![None; n];
    for m in &program.marginals {
        let w = if m.parties.iter().all(|&p| isos[p].is_none()) {
            None
        } else {
            Some(kron_all(
                &m.parties.iter().map(|&p| factor(p)).collect::<Vec<_>>(),
            ))
        };
        let target = m.effective_target();
        let mut tc = compress(&w, target.matrix());
        let kept = tc.trace().re;
        if (target.operator().trace() - kept).abs() > COMPRESSION_LOSS_TOL {
            return Err(SdpError::Infeasible(target.operator().trace() - kept));
        }
        tc.scale_mut(1.0 / kept);
        for e in hermitian_basis(tc.rows()) {
            rhs.push(e.inner(&tc));
            ops.push(embed_operator(&e, &cdims, &m.parties)?);
        }
        if m.parties.len() == 1 && single[m.parties[0]].is_none() {
            single[m.parties[0]] = Some(tc);
        }
    }
    for e in &program.equalities {
        ops.push(compress(&lift, e.op.matrix()));
        rhs.push(e.rhs);
    }
    for block in &program.symmetric_blocks {
        ops.push(compress(&lift, &symmetric_block_operator(dims, block)?));
        rhs.push(1.0);
    }
    let affine = AffineSystem::from_raw(&ops, &rhs)?;

    let reference = if single.iter().all(Option::is_some) {
        let p = kron_all(&single.into_iter().map(Option::unwrap).collect::<Vec<_>>());
        (affine.residual(&p) <= 1e-9).then_some(p)
    } else {
        None
    };

    let cut_perms = program
        .ppt_cuts
        .iter()
        .map(|cut| partial_transpose_permutation(&cdims, cut))
        .collect();
    Ok(Reduced {
        dims: cdims,
        cost: compress(&lift, program.cost.matrix()),
        lift,
        affine,
        cut_perms,
        reference,
    })
}

#[derive(Clone)]
/// One cone block: `T(PSD)` with `T` a partial transpose (or the identity).
struct Cone {
    perm: Option<Vec<usize>>,
    warm: CMatrix,
}

impl Cone {
    fn new(perm: Option<Vec<usize>>, dim: usize) -> Self {
        Self {
            perm,
            warm: CMatrix::identity(dim),
        }
    }

    fn to_psd_frame(&self, m: &CMatrix) -> CMatrix {
        match &self.perm {
            Some(p) => permute(m, p),
            None => m.clone(),
        }
    }

    fn eig(&mut self, m: &CMatrix) -> Result<EigenDecomposition, SdpError> {
        let e = hermitian_eig_warm(&self.to_psd_frame(m), &self.warm)?;
        self.warm = e.vectors.clone();
        Ok(e)
    }

    fn project(&mut self, m: &CMatrix) -> Result<CMatrix, SdpError> {
        let e = self.eig(m)?;
        let pos: Vec<usize> = (0..e.dim()).filter(|&k| e.values[k] > 0.0).collect();
        let n = e.dim();
        let b = CMatrix::from_fn(pos.len(), n, |j, i| {
            e.vectors[(i, pos[j])].conj() * e.values[pos[j]].sqrt()
        });
        Ok(self.to_psd_frame(&b.adjoint_mul(&b)))
    }

    fn min_eig(&self, m: &CMatrix) -> Result<f64, SdpError> {
        Ok(hermitian_eig_warm(&self.to_psd_frame(m), &self.warm)?.min_value())
    }
}

struct Normalized {
    cost: CMatrix,
    scale: f64,
    offset: f64,
    /// `Tr X` when the equalities fix it.
    trace: Option<f64>,
}

fn normalize(red: &Reduced, sign: f64) -> Normalized {
    let c = red.cost.scale(sign);
    let coeff = red.affine.coefficients(&c);
    let offset: f64 = coeff.iter().zip(&red.affine.rhs).map(|(a, b)| a * b).sum();
    let perp = red.affine.orthogonal_part(&c);
    let norm = perp.norm_fro();
    let (cost, scale) = if norm <= 1e-13 * (1.0 + c.norm_fro()) {
        (CMatrix::zeros(c.rows(), c.cols()), 1.0)
    } else {
        (perp.scale(1.0 / norm), norm)
    };
    let id = CMatrix::identity(c.rows());
    let fixed = red.affine.orthogonal_part(&id).norm_fro() <= 1e-9 * (c.rows() as f64).sqrt();
    let trace = fixed.then(|| {
        red.affine
            .coefficients(&id)
            .iter()
            .zip(&red.affine.rhs)
            .map(|(a, b)| a * b)
            .sum::<f64>()
    });
    Normalized {
        cost,
        scale,
        offset,
        trace,
    }
}

/// Dual bound on `min <C, X>` from the scaled multipliers `us`:
/// with `S_j = -rho U_j` in `K_j*`, fit `y` so that `C - A^* y` is close to
/// `sum_j S_j`, then `M = C - A^* y - sum_{j>=1} S_j` gives
/// `<C, X> >= b.y + Tr(X) lambda_min(M)` for every feasible `X`.
///
/// Returns the bound and the dual infeasibility `max(0, -lambda_min(M))`.
fn lower_bound(
    red: &Reduced,
    norm: &Normalized,
    us: &[CMatrix],
    rho: f64,
) -> Result<(f64, f64), SdpError> {
    let Some(tau) = norm.trace else {
        return Ok((f64::NEG_INFINITY, f64::INFINITY));
    };
    let mut r = norm.cost.clone();
    for u in us {
        r.axpy(rho, u);
    }
    let y = red.affine.coefficients(&r);
    let mut m = norm.cost.clone();
    for (q, &yi) in red.affine.basis.iter().zip(&y) {
        m.axpy(-yi, q);
    }
    for u in &us[1..] {
        m.axpy(rho, u);
    }
    let lam = hermitian_eig(&Hermitian::from_hermitian_part(&m))?.min_value();
    let by: f64 = y.iter().zip(&red.affine.rhs).map(|(a, b)| a * b).sum();
    Ok((by + tau * lam, (-lam).max(0.0)))
}

/// Cyclic projections onto the cones and the affine set, starting at `x`.
fn alternate(
    red: &Reduced,
    cones: &[Cone],
    x: &CMatrix,
    rounds: usize,
) -> Result<CMatrix, SdpError> {
    let mut work: Vec<Cone> = cones.to_vec();
    let mut x = x.clone();
    for _ in 0..rounds {
        for cone in work.iter_mut() {
            x = cone.project(&x)?;
            red.affine.project(&mut x);
            x = x.hermitian_part();
        }
    }
    Ok(x)
}

/// Moves `x` (equalities exact) toward the strictly feasible `reference` just
/// enough to satisfy every cone. Without a reference `x` is returned as is.
fn restore_cones(
    cones: &[Cone],
    x: &CMatrix,
    reference: Option<(&CMatrix, &[f64])>,
) -> Result<CMatrix, SdpError> {
    let Some((p, mus)) = reference else {
        return Ok(x.clone());
    };
    let mut t = 0.0_f64;
    for (cone, &mu) in cones.iter().zip(mus) {
        let e = (-cone.min_eig(x)?).max(0.0);
        if e > 0.0 {
            t = t.max(e / (e + mu));
        }
    }
    let mut xf = x.scale(1.0 - t);
    xf.axpy(t, p);
    Ok(xf)
}

/// Largest equality residual or cone violation of `x`.
fn violation(red: &Reduced, cones: &[Cone], x: &CMatrix) -> Result<f64, SdpError> {
    let mut v = red.affine.residual(x);
    for cone in cones {
        v = v.max(-cone.min_eig(x)?);
    }
    Ok(v)
}

fn infeasible_result(program: &CouplingProgram, residual: f64) -> SdpResult {
    SdpResult {
        value: f64::NAN,
        optimizer: Hermitian::zeros(program.total_dim()),
        primal_residual: residual,
        dual_residual: f64::NAN,
        gap: f64::NAN,
        value_interval: (f64::NAN, f64::NAN),
        iterations: 0,
        status: Status::Infeasible,
    }
}

/// Solves `program`. Inconsistent equalities give `Status::Infeasible`; the
/// iteration cap gives `Status::MaxIter` with the last iterate and honest
/// residuals.
///
/// Two exits count as converged: the ADMM residuals and the duality gap all
/// meet their tolerances, or a polished point is feasible to `tol_primal`
/// and its objective is within `tol_gap` of the dual bound while the dual
/// certificate is infeasible by at most `tol_dual`.
pub fn solve(program: &CouplingProgram, settings: &SolverSettings) -> Result<SdpResult, SdpError> {
    program.validate()?;
    settings.validate()?;
    let red = match reduce(program) {
        Ok(r) => r,
        Err(SdpError::Infeasible(res)) => return Ok(infeasible_result(program, res)),
        Err(e) => return Err(e),
    };
    let sign = match program.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let norm = normalize(&red, sign);
    let dc: usize = red.dims.iter().product();

    let mut cones = vec![Cone::new(None, dc)];
    cones.extend(red.cut_perms.iter().map(|p| Cone::new(Some(p.clone()), dc)));
    let nb = cones.len();
    let mus: Vec<f64> = match &red.reference {
        Some(p) => cones
            .iter()
            .map(|c| c.min_eig(p))
            .collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    let reference = red.reference.as_ref().map(|p| (p, mus.as_slice()));

    let x0 = match &red.reference {
        Some(p) => p.clone(),
        None => {
            let mut z = CMatrix::identity(dc).scale(1.0 / dc as f64);
            red.affine.project(&mut z);
            z
        }
    };
    // The iteration is a fixed-point map on W_j = Z_j + U_j; Z_j = X0, U_j = 0 to start.
    let mut ws = vec![x0.clone(); nb];
    let mut x = x0;
    let mut us = vec![CMatrix::zeros(dc, dc); nb];
    let mut zs_prev: Option<Vec<CMatrix>> = None;
    let mut rho = settings.rho;
    let alpha = settings.alpha;
    let (mut r_p, mut r_d) = (f64::INFINITY, f64::INFINITY);
    let (mut lb, mut dual_inf) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut status = Status::MaxIter;
    let mut iterations = settings.max_iter;
    let mut aa = Anderson::new(AA_MEMORY);
    // plain step and residual norm to fall back to if an accelerated step fails
    let mut pending: Option<(Vec<CMatrix>, f64)> = None;
    // best certified feasible point: (objective, point, violation)
    let mut best: Option<(f64, CMatrix, f64)> = None;

    for it in 1..=settings.max_iter {
        let mut zs = Vec::with_capacity(nb);
        for (cone, w) in cones.iter_mut().zip(&ws) {
            zs.push(cone.project(w)?);
        }
        us = ws.iter().zip(&zs).map(|(w, z)| w - z).collect();
        let mut v = CMatrix::zeros(dc, dc);
        for (z, u) in zs.iter().zip(&us) {
            v += z;
            v -= u;
        }
        v.scale_mut(1.0 / nb as f64);
        v.axpy(-1.0 / (rho * nb as f64), &norm.cost);
        red.affine.project(&mut v);
        x = v.hermitian_part();
        let fs: Vec<CMatrix> = zs
            .iter()
            .zip(&us)
            .map(|(z, u)| {
                let mut f = x.scale(alpha);
                f.axpy(1.0 - alpha, z);
                f += u;
                f
            })
            .collect();
        let g_norm = fs
            .iter()
            .zip(&ws)
            .map(|(f, w)| (f - w).norm_fro().powi(2))
            .sum::<f64>()
            .sqrt();

        if let Some((fallback, g_prev)) = pending.take() {
            if g_norm > AA_SAFEGUARD * g_prev {
                ws = fallback;
                aa.reset();
                continue;
            }
        }

        r_p = zs.iter().map(|z| (&x - z).norm_fro()).fold(0.0, f64::max);
        r_d = match &zs_prev {
            Some(prev) => zs
                .iter()
                .zip(prev)
                .map(|(z, zp)| rho * (z - zp).norm_fro())
                .fold(0.0, f64::max),
            None => f64::INFINITY,
        };
        zs_prev = Some(zs.clone());

        if it % CHECK_EVERY == 0 || it == settings.max_iter {
            (lb, dual_inf) = lower_bound(&red, &norm, &us, rho)?;
            let gap = norm.scale * (norm.cost.inner(&x) - lb).abs();
            if r_p <= settings.tol_primal && r_d <= settings.tol_dual && gap <= settings.tol_gap {
                status = Status::Converged;
                iterations = it;
                break;
            }
            if it % POLISH_EVERY == 0 && r_p <= POLISH_START && norm.trace.is_some() {
                let xa = alternate(&red, &cones, &x, POLISH_ROUNDS)?;
                let xf = restore_cones(&cones, &xa, reference)?;
                let viol = violation(&red, &cones, &xf)?;
                let obj = norm.cost.inner(&xf);
                if viol <= settings.tol_primal && best.as_ref().map_or(true, |b| obj < b.0) {
                    best = Some((obj, xf, viol));
                }
                if let Some((obj, _, _)) = &best {
                    if norm.scale * (obj - lb) <= settings.tol_gap
                        && norm.scale * dual_inf <= settings.tol_dual
                    {
                        status = Status::Converged;
                        iterations = it;
                        break;
                    }
                }
            }
        }

        if settings.adaptive_rho && it % ADAPT_EVERY == 0 {
            let factor = if r_p > ADAPT_RATIO * r_d {
                ADAPT_FACTOR
            } else if r_d > ADAPT_RATIO * r_p {
                1.0 / ADAPT_FACTOR
            } else {
                1.0
            };
            if factor != 1.0 {
                rho *= factor;
                ws = zs
                    .iter()
                    .zip(&us)
                    .map(|(z, u)| {
                        let mut w = z.clone();
                        w.axpy(1.0 / factor, u);
                        w
                    })
                    .collect();
                aa.reset();
                continue;
            }
        }

        let w_flat = flatten(&ws);
        let g_flat: Vec<f64> = flatten(&fs)
            .iter()
            .zip(&w_flat)
            .map(|(f, w)| f - w)
            .collect();
        match aa.step(&w_flat, &g_flat) {
            Some(next) => {
                pending = Some((fs, g_norm));
                ws = unflatten(&next, nb, dc);
            }
            None => ws = fs,
        }
    }

    let to_orig = |v: f64| norm.scale * v + norm.offset;
    let polished = status == Status::Converged && best.is_some() && !(r_p <= settings.tol_primal);
    let (x_out, value_n, primal_residual, dual_residual, ub_n) = match (&best, polished) {
        (Some((obj, xf, viol)), true) => (xf.clone(), *obj, *viol, norm.scale * dual_inf, *obj),
        _ => {
            let value_n = norm.cost.inner(&x);
            // a polish of the final iterate usually beats the best earlier one
            let fresh = match reference {
                Some(_) => {
                    let xa = alternate(&red, &cones, &x, POLISH_ROUNDS)?;
                    let mut cands = Vec::new();
                    for xf in [
                        restore_cones(&cones, &x, reference)?,
                        restore_cones(&cones, &xa, reference)?,
                    ] {
                        if violation(&red, &cones, &xf)? <= settings.tol_primal {
                            cands.push(norm.cost.inner(&xf));
                        }
                    }
                    cands.into_iter().reduce(f64::min)
                }
                None => None,
            };
            let ub_n = match (best.as_ref().map(|b| b.0), fresh) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => value_n + (value_n - lb).abs() + r_p,
            };
            (x.clone(), value_n, r_p, r_d, ub_n)
        }
    };
    let value = to_orig(value_n);
    let lo = to_orig(lb).min(value);
    let hi = to_orig(ub_n).max(value);
    let gap = (value - to_orig(lb)).abs();
    let (value, value_interval) = match program.sense {
        Sense::Minimize => (value, (lo, hi)),
        Sense::Maximize => (-value, (-hi, -lo)),
    };
    let optimizer = match &red.lift {
        Some(w) => Hermitian::from_hermitian_part(&w.matmul(&x_out).matmul(&w.adjoint())),
        None => Hermitian::from_hermitian_part(&x_out),
    };
    Ok(SdpResult {
        value,
        optimizer,
        primal_residual,
        dual_residual,
        gap,
        value_interval,
        iterations,
        status,
    })
}
