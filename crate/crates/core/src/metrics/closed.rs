//! Closed-form quantities: fidelities, Fisher and skew information, and the
//! moment-based distances.

use super::{MetricsError, ObservableSet};
use crate::linalg::{hermitian_eig, psd_sqrt, Hermitian};
use crate::states::{evolve, expectation, variance, DensityMatrix};

/// Weight sums at or below this are skipped in the Fisher information.
const QFI_CUTOFF: f64 = 1e-12;
/// Relative size below which eigenvalues of `sqrt(rho) sigma sqrt(rho)` count as zero.
const ROOT_FLOOR: f64 = 1e-14;

fn same_dim(a: usize, b: usize) -> Result<(), MetricsError> {
    if a == b {
        Ok(())
    } else {
        Err(MetricsError::Dimension(a, b))
    }
}

/// `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`, clipped to `[0, 1]`.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, MetricsError> {
    same_dim(rho.dim(), sigma.dim())?;
    let s = psd_sqrt(rho.operator())?;
    let inner =
        Hermitian::from_hermitian_part(&s.matrix().matmul(sigma.matrix()).matmul(s.matrix()));
    let values = hermitian_eig(&inner)?.values;
    // round-off eigenvalues would otherwise contribute ~1e-8 each through the root
    let floor = ROOT_FLOOR * values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let root: f64 = values
        .iter()
        .filter(|&&v| v > floor)
        .map(|v| v.sqrt())
        .sum();
    Ok((root * root).clamp(0.0, 1.0))
}

/// `Tr(rho sigma) + sqrt((1 - Tr rho^2)(1 - Tr sigma^2))`.
pub fn superfidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, MetricsError> {
    same_dim(rho.dim(), sigma.dim())?;
    let overlap = rho.operator().trace_product(sigma.operator());
    let mixed = ((1.0 - rho.purity()).max(0.0) * (1.0 - sigma.purity()).max(0.0)).sqrt();
    Ok(overlap + mixed)
}

/// `2 (1 - sqrt F)`.
pub fn bures_distance_sq(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, MetricsError> {
    Ok(2.0 * (1.0 - uhlmann_fidelity(rho, sigma)?.sqrt()))
}

/// Quantum Fisher information
/// `2 sum_{k,l} (l_k - l_l)^2 / (l_k + l_l) |<k|H|l>|^2`.
pub fn qfi(rho: &DensityMatrix, h: &Hermitian) -> Result<f64, MetricsError> {
    same_dim(rho.dim(), h.dim())?;
    let e = rho.eig();
    let hk = e.vectors.adjoint_mul(&h.matrix().matmul(&e.vectors));
    let n = e.dim();
    let mut total = 0.0;
    for k in 0..n {
        for l in 0..n {
            let (a, b) = (e.values[k].max(0.0), e.values[l].max(0.0));
            if a + b <= QFI_CUTOFF {
                continue;
            }
            total += (a - b).powi(2) / (a + b) * hk[(k, l)].norm_sqr();
        }
    }
    Ok(2.0 * total)
}

/// Wigner-Yanase skew information `Tr(H^2 rho) - Tr(H sqrt(rho) H sqrt(rho))`.
pub fn skew_information(rho: &DensityMatrix, h: &Hermitian) -> Result<f64, MetricsError> {
    same_dim(rho.dim(), h.dim())?;
    // round-off eigenvalues of a pure state would add ~1e-8 through the root
    let e = rho.eig();
    let floor = ROOT_FLOOR * e.max_value();
    let s = e.apply(|v| if v > floor { v.sqrt() } else { 0.0 });
    let hs = h.matrix().matmul(s.matrix());
    let cross = hs.trace_product(&hs).re;
    Ok((rho.operator().trace_product(&h.square()) - cross).max(0.0))
}

fn check_obs(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    obs: &ObservableSet,
) -> Result<(), MetricsError> {
    same_dim(rho.dim(), sigma.dim())?;
    same_dim(rho.dim(), obs.dim())
}

/// `1/2 sum_n [Var_rho(H_n) + Var_sigma(H_n) + (<H_n>_rho - <H_n>_sigma)^2]`.
pub fn delta_sq(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    obs: &ObservableSet,
) -> Result<f64, MetricsError> {
    check_obs(rho, sigma, obs)?;
    let mut total = 0.0;
    for h in obs.ops() {
        let gap = expectation(rho, h)? - expectation(sigma, h)?;
        total += variance(rho, h)? + variance(sigma, h)? + gap * gap;
    }
    Ok(0.5 * total)
}

/// `1/2 sum_n (<H_n>_rho - <H_n>_sigma)^2`.
pub fn euclid_sq(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    obs: &ObservableSet,
) -> Result<f64, MetricsError> {
    check_obs(rho, sigma, obs)?;
    let mut total = 0.0;
    for h in obs.ops() {
        total += (expectation(rho, h)? - expectation(sigma, h)?).powi(2);
    }
    Ok(0.5 * total)
}

/// `sum_k l_k Delta^2(|k>, sigma)` over the eigendecomposition of `rho`: the
/// cost of the separable coupling `sum_k l_k |k><k| ⊗ sigma`.
pub fn decomp_upper_bound(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    obs: &ObservableSet,
) -> Result<f64, MetricsError> {
    check_obs(rho, sigma, obs)?;
    let e = rho.eig();
    let mut total = 0.0;
    for k in 0..e.dim() {
        let w = e.values[k].max(0.0);
        if w == 0.0 {
            continue;
        }
        let ket = DensityMatrix::normalized(Hermitian::projector(&e.vector(k)))?;
        total += w * delta_sq(&ket, sigma, obs)?;
    }
    Ok(total)
}

/// Central difference `[F(rho, rho_t) + F(rho, rho_-t) - 2] / t^2` at `t = step`,
/// with `rho_t = e^{-iHt} rho e^{iHt}`.
pub fn fidelity_second_derivative(
    rho: &DensityMatrix,
    h: &Hermitian,
    step: f64,
) -> Result<f64, MetricsError> {
    same_dim(rho.dim(), h.dim())?;
    if !(1e-3..=1e-1).contains(&step) {
        return Err(MetricsError::Argument(format!(
            "step {step} outside [1e-3, 1e-1]"
        )));
    }
    let plus = uhlmann_fidelity(rho, &evolve(rho, h, step)?)?;
    let minus = uhlmann_fidelity(rho, &evolve(rho, h, -step)?)?;
    Ok((plus + minus - 2.0) / (step * step))
}
