//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use num_complex::Complex64;

use super::{CMatrix, Hermitian, LinalgError, PSD_TOL};

const OFF_DIAGONAL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    /// `V f(Lambda) V^dagger`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Hermitian {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        Hermitian::from_hermitian_part(&scaled.matmul(&self.vectors.adjoint()))
    }

    /// Reconstruction `V Lambda V^dagger`.
    pub fn reconstruct(&self) -> Hermitian {
        self.apply(|x| x)
    }
}

/// Full eigendecomposition of a Hermitian operator.
pub fn hermitian_eig(m: &Hermitian) -> Result<EigenDecomposition, LinalgError> {
    let mut a = m.matrix().clone();
    let mut v = CMatrix::identity(m.dim());
    jacobi_in_place(&mut a, &mut v)?;
    Ok(sorted(a, v))
}

/// Eigendecomposition started from an approximate eigenbasis `guess`.
///
/// The columns of `guess` are re-orthonormalised, `m` is rotated into that
/// basis and the Jacobi sweeps only have to remove the small residual
/// off-diagonal part. Used by the conic solver, whose iterates move slowly.
pub fn hermitian_eig_warm(m: &CMatrix, guess: &CMatrix) -> Result<EigenDecomposition, LinalgError> {
    let n = m.rows();
    if guess.rows() != n || guess.cols() != n {
        return Err(LinalgError::Dimension(
            "warm-start basis has wrong shape".into(),
        ));
    }
    let mut q = guess.clone();
    orthonormalize_columns(&mut q);
    let mut a = q.adjoint_mul(&m.matmul(&q)).hermitian_part();
    jacobi_in_place(&mut a, &mut q)?;
    Ok(sorted(a, q))
}

/// Principal square root of a PSD operator. Eigenvalues in `[-1e-10, 0)` are
/// clipped to zero; anything more negative is rejected.
pub fn psd_sqrt(m: &Hermitian) -> Result<Hermitian, LinalgError> {
    let e = hermitian_eig(m)?;
    if e.min_value() < -PSD_TOL {
        return Err(LinalgError::NotPsd(e.min_value()));
    }
    Ok(e.apply(|x| x.max(0.0).sqrt()))
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += a[(i, j)].norm_sqr();
        }
    }
    (2.0 * s).sqrt()
}

/// Runs cyclic Jacobi sweeps on the Hermitian matrix `a`, accumulating the
/// rotations into the columns of `v`. On return `a` is diagonal (to tolerance).
fn jacobi_in_place(a: &mut CMatrix, v: &mut CMatrix) -> Result<(), LinalgError> {
    let n = a.rows();
    let scale = a.norm_fro();
    if n < 2 || scale == 0.0 {
        return Ok(());
    }
    let target = OFF_DIAGONAL_TOL * scale;
    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(a) <= target {
            return Ok(());
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(a, v, p, q, target / n as f64);
            }
        }
    }
    let residual = off_diagonal_norm(a);
    if residual <= target {
        Ok(())
    } else {
        Err(LinalgError::NoConvergence {
            sweeps: MAX_SWEEPS,
            residual,
        })
    }
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
///
/// With `a_pq = |a_pq| e^{i phi}` the unitary acting on the (p, q) plane is
/// `U = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]`, and `a <- U^dagger a U`.
#[inline]
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, skip_below: f64) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag <= skip_below.max(f64::MIN_POSITIVE) {
        return;
    }
    let phase = apq / mag; // e^{i phi}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let ephase_conj = phase.conj(); // e^{-i phi}
    let n = a.rows();

    // a <- a U (columns p and q)
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * ephase_conj * s;
        a[(k, q)] = akp * s + akq * ephase_conj * c;
    }
    // a <- U^dagger a (rows p and q)
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * phase * s;
        a[(q, k)] = apk * s + aqk * phase * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
    // v <- v U
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * ephase_conj * s;
        v[(k, q)] = vkp * s + vkq * ephase_conj * c;
    }
}

fn sorted(a: CMatrix, v: CMatrix) -> EigenDecomposition {
    let n = a.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    EigenDecomposition { values, vectors }
}

/// Modified Gram-Schmidt on the columns of `q`, in place.
fn orthonormalize_columns(q: &mut CMatrix) {
    let n = q.rows();
    let m = q.cols();
    for j in 0..m {
        for k in 0..j {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..n {
                dot += q[(i, k)].conj() * q[(i, j)];
            }
            for i in 0..n {
                let qik = q[(i, k)];
                q[(i, j)] -= dot * qik;
            }
        }
        let norm = (0..n).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-300 {
            for i in 0..n {
                q[(i, j)] /= norm;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn pauli_x() -> Hermitian {
        Hermitian::new(CMatrix::from_fn(2, 2, |i, j| {
            if i != j {
                c64(1.0, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        }))
        .unwrap()
    }

    fn unitarity_error(v: &CMatrix) -> f64 {
        v.adjoint_mul(v).max_abs_diff(&CMatrix::identity(v.cols()))
    }

    #[test]
    fn diagonal_jz_like() {
        let m = Hermitian::diag(&[1.5, -0.5, 0.5, -1.5]);
        let e = hermitian_eig(&m).unwrap();
        assert_eq!(e.values, vec![-1.5, -0.5, 0.5, 1.5]);
        // standard basis vectors, permuted into ascending order
        let expect = [3usize, 1, 2, 0];
        for (col, &row) in expect.iter().enumerate() {
            assert!((e.vectors[(row, col)].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_spectrum() {
        let e = hermitian_eig(&Hermitian::identity(5)).unwrap();
        assert!(e.values.iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn pauli_x_spectrum() {
        let e = hermitian_eig(&pauli_x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        assert!(e.reconstruct().matrix().max_abs_diff(pauli_x().matrix()) < 1e-14);
    }

    #[test]
    fn complex_entries_reconstruct() {
        let m = Hermitian::from_hermitian_part(&CMatrix::from_fn(6, 6, |i, j| {
            c64(
                ((i * 7 + j * 3) % 5) as f64 - 2.0,
                ((i * 2 + j * 5) % 7) as f64 - 3.0,
            )
        }));
        let e = hermitian_eig(&m).unwrap();
        assert!(e.reconstruct().matrix().max_abs_diff(m.matrix()) < 1e-12);
        assert!(unitarity_error(&e.vectors) < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn warm_start_agrees_with_cold() {
        let m = Hermitian::from_hermitian_part(&CMatrix::from_fn(5, 5, |i, j| {
            c64((i + j) as f64 * 0.3 - 1.0, (i as f64 - j as f64) * 0.7)
        }));
        let cold = hermitian_eig(&m).unwrap();
        let perturbed = m.add(&Hermitian::diag(&[1e-3, 0.0, -2e-3, 0.0, 5e-4]));
        let warm = hermitian_eig_warm(perturbed.matrix(), &cold.vectors).unwrap();
        let direct = hermitian_eig(&perturbed).unwrap();
        for (a, b) in warm.values.iter().zip(&direct.values) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(warm.reconstruct().matrix().max_abs_diff(perturbed.matrix()) < 1e-12);
    }

    #[test]
    fn sqrt_examples() {
        let id = Hermitian::identity(3);
        assert!(psd_sqrt(&id).unwrap().matrix().max_abs_diff(id.matrix()) < 1e-14);
        let half = Hermitian::identity(2).scale(0.5);
        let r = psd_sqrt(&half).unwrap();
        assert!(
            r.matrix().max_abs_diff(
                Hermitian::identity(2)
                    .scale(std::f64::consts::FRAC_1_SQRT_2)
                    .matrix()
            ) < 1e-14
        );
        let proj = Hermitian::diag(&[1.0, 0.0]);
        assert!(
            psd_sqrt(&proj)
                .unwrap()
                .matrix()
                .max_abs_diff(proj.matrix())
                < 1e-14
        );
        assert!(matches!(
            psd_sqrt(&Hermitian::diag(&[1.0, -1e-6])),
            Err(LinalgError::NotPsd(_))
        ));
        // tiny negative eigenvalue is clipped
        let r = psd_sqrt(&Hermitian::diag(&[0.25, -1e-12])).unwrap();
        assert!((r.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert_eq!(r.matrix()[(1, 1)].re, 0.0);
    }
}
