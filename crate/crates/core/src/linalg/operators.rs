//! Fixed operators: SWAP, SU(d) generators, collective J_z and the projector
//! onto the symmetric subspace.

use num_complex::Complex64;

use super::{CMatrix, Hermitian};

/// Permutation operator on `p` parties of dimension `d`:
/// `|i_0 .. i_{p-1}> -> |i_{perm[0]} .. i_{perm[p-1]}>`.
fn permutation_operator(d: usize, perm: &[usize]) -> CMatrix {
    let p = perm.len();
    let total = d.pow(p as u32);
    let mut out = CMatrix::zeros(total, total);
    let mut digits = vec![0; p];
    for col in 0..total {
        let mut idx = col;
        for k in (0..p).rev() {
            digits[k] = idx % d;
            idx /= d;
        }
        let row = perm.iter().fold(0, |acc, &src| acc * d + digits[src]);
        out[(row, col)] = Complex64::new(1.0, 0.0);
    }
    out
}

/// SWAP on two `d`-dimensional parties: `S |a>|b> = |b>|a>`.
pub fn swap_operator(d: usize) -> Hermitian {
    assert!(d >= 1, "dimension must be positive");
    Hermitian::from_hermitian_part(&permutation_operator(d, &[1, 0]))
}

/// SWAP of parties `a` and `b` among `n_parties` parties of dimension `d`.
pub fn swap_parties(d: usize, n_parties: usize, a: usize, b: usize) -> Hermitian {
    assert!(a < n_parties && b < n_parties);
    let mut perm: Vec<usize> = (0..n_parties).collect();
    perm.swap(a, b);
    Hermitian::from_hermitian_part(&permutation_operator(d, &perm))
}

/// Generalised Gell-Mann matrices: the `d^2 - 1` traceless Hermitian
/// generators with `Tr(H_n H_m) = 2 delta_nm`.
///
/// Order: symmetric pairs `(j, k)` with `j < k` in lexicographic order, then
/// antisymmetric pairs in the same order, then the `d - 1` diagonal ones.
/// For `d = 2` this is `(sigma_x, sigma_y, sigma_z)`.
pub fn su_generators(d: usize) -> Vec<Hermitian> {
    assert!(d >= 2, "SU(d) generators need d >= 2");
    let mut out = Vec::with_capacity(d * d - 1);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = one;
            m[(k, j)] = one;
            out.push(Hermitian::from_hermitian_part(&m));
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = -i;
            m[(k, j)] = i;
            out.push(Hermitian::from_hermitian_part(&m));
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; d];
        for v in diag.iter_mut().take(l) {
            *v = norm;
        }
        diag[l] = -(l as f64) * norm;
        out.push(Hermitian::diag(&diag));
    }
    out
}

/// Spin-(d-1)/2 angular momentum component `J_z = diag(-(d-1)/2, ..., (d-1)/2)`.
pub fn jz_operator(d: usize) -> Hermitian {
    assert!(d >= 1);
    let half = (d as f64 - 1.0) / 2.0;
    Hermitian::diag(&(0..d).map(|k| k as f64 - half).collect::<Vec<_>>())
}

fn permutations(p: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(p), &mut vec![false; p], &mut out);
    out
}

/// Projector onto the symmetric subspace of `p` parties of dimension `d`,
/// the average of all `p!` permutation operators.
pub fn symmetric_projector(d: usize, p: usize) -> Hermitian {
    assert!(d >= 1 && p >= 1);
    let perms = permutations(p);
    let total = d.pow(p as u32);
    let mut acc = CMatrix::zeros(total, total);
    for perm in &perms {
        acc += &permutation_operator(d, perm);
    }
    Hermitian::from_hermitian_part(&acc.scale(1.0 / perms.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, hermitian_eig, kron};

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn swap_on_basis_and_trace() {
        let s = swap_operator(2);
        // |01> is index 1, |10> is index 2
        let ket01 = [c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)];
        let out = s.matrix().mul_vec(&ket01);
        assert_eq!(out[2], c64(1.0, 0.0));
        assert_eq!(out[1], c64(0.0, 0.0));
        for d in 2..5 {
            let s = swap_operator(d);
            assert!((s.trace() - d as f64).abs() < 1e-14);
            assert!(s.square().matrix().max_abs_diff(&CMatrix::identity(d * d)) < 1e-14);
        }
    }

    #[test]
    fn singlet_swap_expectation() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = [c64(0.0, 0.0), c64(h, 0.0), c64(-h, 0.0), c64(0.0, 0.0)];
        assert!((swap_operator(2).expectation(&singlet) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn su2_is_pauli() {
        let g = su_generators(2);
        assert_eq!(g.len(), 3);
        assert_eq!(g[0].matrix()[(0, 1)], c64(1.0, 0.0));
        assert_eq!(g[1].matrix()[(0, 1)], c64(0.0, -1.0));
        assert_eq!(g[1].matrix()[(1, 0)], c64(0.0, 1.0));
        assert_eq!(g[2].matrix()[(0, 0)], c64(1.0, 0.0));
        assert_eq!(g[2].matrix()[(1, 1)], c64(-1.0, 0.0));
    }

    #[test]
    fn su_orthogonality_and_sums() {
        for d in 2..=5 {
            let g = su_generators(d);
            assert_eq!(g.len(), d * d - 1);
            for (n, a) in g.iter().enumerate() {
                assert!(a.trace().abs() < 1e-12);
                for (m, b) in g.iter().enumerate() {
                    let expect = if n == m { 2.0 } else { 0.0 };
                    assert!((a.trace_product(b) - expect).abs() < 1e-12);
                }
            }
            // sum_n H_n^2 = 2(d^2-1)/d I
            let mut sq = CMatrix::zeros(d, d);
            for h in &g {
                sq += h.square().matrix();
            }
            let expect = CMatrix::identity(d).scale(2.0 * (d * d - 1) as f64 / d as f64);
            assert!(sq.max_abs_diff(&expect) < 1e-12);
        }
    }

    #[test]
    fn sum_of_tensor_squares_is_swap() {
        for d in [2, 3] {
            let mut acc = CMatrix::zeros(d * d, d * d);
            for h in su_generators(d) {
                acc += &kron(h.matrix(), h.matrix());
            }
            let s = swap_operator(d);
            let expect = (s.matrix() - &CMatrix::identity(d * d).scale(1.0 / d as f64)).scale(2.0);
            assert!(acc.max_abs_diff(&expect) < 1e-12);
        }
    }

    #[test]
    fn jz_examples() {
        assert_eq!(jz_operator(4), Hermitian::diag(&[-1.5, -0.5, 0.5, 1.5]));
        assert_eq!(jz_operator(2), Hermitian::diag(&[-0.5, 0.5]));
        for d in 2..8 {
            assert!(jz_operator(d).trace().abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_projector_properties() {
        let p = symmetric_projector(2, 2);
        let e = hermitian_eig(&p).unwrap();
        let rank = e.values.iter().filter(|&&x| x > 0.5).count();
        assert_eq!(rank, 3);
        // (I + S)/2 on two qubits; the singlet is in the kernel
        let expect = (&CMatrix::identity(4) + swap_operator(2).matrix()).scale(0.5);
        assert!(p.matrix().max_abs_diff(&expect) < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = [c64(0.0, 0.0), c64(h, 0.0), c64(-h, 0.0), c64(0.0, 0.0)];
        assert!(p.expectation(&singlet).abs() < 1e-15);
        assert!((symmetric_projector(3, 2).trace() - 6.0).abs() < 1e-12);
        for (d, k) in [(2, 3), (3, 3), (2, 4)] {
            let p = symmetric_projector(d, k);
            assert!(p.square().matrix().max_abs_diff(p.matrix()) < 1e-12);
            assert!((p.trace() - binomial(d + k - 1, k) as f64).abs() < 1e-10);
        }
    }
}
