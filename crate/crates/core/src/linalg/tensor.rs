//! Tensor-product structure: Kronecker products, partial traces and partial
//! transposes over an ordered list of party dimensions. Party 0 is the most
//! significant factor, matching `kron(A, B)` with `A` on party 0.

use num_complex::Complex64;

use super::{CMatrix, LinalgError};

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

fn check_dims(m: &CMatrix, dims: &[usize], parties: &[usize]) -> Result<(), LinalgError> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) {
        return Err(LinalgError::Dimension(
            "party dimensions must be positive".into(),
        ));
    }
    if !m.is_square() || m.rows() != total {
        return Err(LinalgError::Dimension(format!(
            "matrix is {}x{} but party dimensions {:?} multiply to {}",
            m.rows(),
            m.cols(),
            dims,
            total
        )));
    }
    if let Some(&p) = parties.iter().find(|&&p| p >= dims.len()) {
        return Err(LinalgError::Dimension(format!(
            "party {} out of range for {} parties",
            p,
            dims.len()
        )));
    }
    Ok(())
}

#[inline]
fn split_index(mut idx: usize, dims: &[usize], digits: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        digits[k] = idx % dims[k];
        idx /= dims[k];
    }
}

#[inline]
fn join_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
}

/// Traces out `traced` parties; the result acts on the remaining parties in
/// their original order. Tracing every party yields the 1x1 matrix `[Tr M]`.
pub fn partial_trace(
    m: &CMatrix,
    dims: &[usize],
    traced: &[usize],
) -> Result<CMatrix, LinalgError> {
    check_dims(m, dims, traced)?;
    let n = dims.len();
    let is_traced: Vec<bool> = (0..n).map(|k| traced.contains(&k)).collect();
    let kept_dims: Vec<usize> = (0..n).filter(|&k| !is_traced[k]).map(|k| dims[k]).collect();
    let traced_dims: Vec<usize> = (0..n).filter(|&k| is_traced[k]).map(|k| dims[k]).collect();
    let kept_total: usize = kept_dims.iter().product();
    let traced_total: usize = traced_dims.iter().product();

    let mut out = CMatrix::zeros(kept_total, kept_total);
    let mut kd_i = vec![0; kept_dims.len()];
    let mut kd_j = vec![0; kept_dims.len()];
    let mut td = vec![0; traced_dims.len()];
    let mut full_i = vec![0; n];
    let mut full_j = vec![0; n];
    for i in 0..kept_total {
        split_index(i, &kept_dims, &mut kd_i);
        for j in 0..kept_total {
            split_index(j, &kept_dims, &mut kd_j);
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..traced_total {
                split_index(t, &traced_dims, &mut td);
                let (mut a, mut b) = (0, 0);
                for k in 0..n {
                    if is_traced[k] {
                        full_i[k] = td[b];
                        full_j[k] = td[b];
                        b += 1;
                    } else {
                        full_i[k] = kd_i[a];
                        full_j[k] = kd_j[a];
                        a += 1;
                    }
                }
                acc += m[(join_index(&full_i, dims), join_index(&full_j, dims))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Transposes the factors belonging to `parties`. An involution that permutes
/// entries, so it preserves trace, Hermiticity and Frobenius norm.
pub fn partial_transpose(
    m: &CMatrix,
    dims: &[usize],
    parties: &[usize],
) -> Result<CMatrix, LinalgError> {
    check_dims(m, dims, parties)?;
    let perm = partial_transpose_permutation(dims, parties);
    let data = m.as_slice();
    let out: Vec<Complex64> = perm.iter().map(|&src| data[src]).collect();
    CMatrix::from_row_major(m.rows(), m.cols(), out)
}

/// Flat-index permutation realising a partial transpose: entry `k` of the
/// output is entry `perm[k]` of the input (row-major). The permutation is its
/// own inverse.
pub(crate) fn partial_transpose_permutation(dims: &[usize], parties: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let total: usize = dims.iter().product();
    let mut perm = Vec::with_capacity(total * total);
    let mut di = vec![0; n];
    let mut dj = vec![0; n];
    for i in 0..total {
        split_index(i, dims, &mut di);
        for j in 0..total {
            split_index(j, dims, &mut dj);
            let (mut si, mut sj) = (di.clone(), dj.clone());
            for &p in parties {
                si[p] = dj[p];
                sj[p] = di[p];
            }
            perm.push(join_index(&si, dims) * total + join_index(&sj, dims));
        }
    }
    perm
}

/// Embeds `op`, acting on `parties` (in the listed order), into the full
/// space as `op ⊗ I` with identities on every other party.
pub fn embed_operator(
    op: &CMatrix,
    dims: &[usize],
    parties: &[usize],
) -> Result<CMatrix, LinalgError> {
    let n = dims.len();
    if parties.iter().any(|&p| p >= n) {
        return Err(LinalgError::Dimension("party out of range".into()));
    }
    let sub_dims: Vec<usize> = parties.iter().map(|&p| dims[p]).collect();
    let sub_total: usize = sub_dims.iter().product();
    if op.rows() != sub_total || op.cols() != sub_total {
        return Err(LinalgError::Dimension(format!(
            "operator is {}x{} but parties {:?} have dimension {}",
            op.rows(),
            op.cols(),
            parties,
            sub_total
        )));
    }
    let total: usize = dims.iter().product();
    let mut out = CMatrix::zeros(total, total);
    let mut di = vec![0; n];
    let mut dj = vec![0; n];
    let mut si = vec![0; parties.len()];
    let mut sj = vec![0; parties.len()];
    for i in 0..total {
        split_index(i, dims, &mut di);
        'col: for j in 0..total {
            split_index(j, dims, &mut dj);
            for k in 0..n {
                if !parties.contains(&k) && di[k] != dj[k] {
                    continue 'col;
                }
            }
            for (s, &p) in parties.iter().enumerate() {
                si[s] = di[p];
                sj[s] = dj[p];
            }
            out[(i, j)] = op[(join_index(&si, &sub_dims), join_index(&sj, &sub_dims))];
        }
    }
    Ok(out)
}
