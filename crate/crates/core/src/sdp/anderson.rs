//! Type-II Anderson acceleration for a fixed-point map `w -> f(w)` on real
//! vectors, with a bounded memory of iterate and residual differences.

pub(crate) struct Anderson {
    memory: usize,
    regularization: f64,
    last: Option<(Vec<f64>, Vec<f64>)>,
    dw: Vec<Vec<f64>>,
    dg: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the small SPD system `a x = b` by Cholesky; `None` if not positive.
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - ((i + 1)..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    Some(x)
}

impl Anderson {
    pub(crate) fn new(memory: usize) -> Self {
        Self {
            memory,
            regularization: 1e-12,
            last: None,
            dw: Vec::new(),
            dg: Vec::new(),
        }
    }

    pub(crate) fn reset(&mut self) {
        self.last = None;
        self.dw.clear();
        self.dg.clear();
    }

    /// Records the pair `(w, g = f(w) - w)` and returns the extrapolated next
    /// iterate, or `None` while the memory is empty or the fit is singular
    /// (the caller then takes the plain step `w + g`).
    pub(crate) fn step(&mut self, w: &[f64], g: &[f64]) -> Option<Vec<f64>> {
        if let Some((w0, g0)) = self.last.take() {
            if self.dw.len() == self.memory {
                self.dw.remove(0);
                self.dg.remove(0);
            }
            self.dw
                .push(w.iter().zip(&w0).map(|(a, b)| a - b).collect());
            self.dg
                .push(g.iter().zip(&g0).map(|(a, b)| a - b).collect());
        }
        self.last = Some((w.to_vec(), g.to_vec()));
        let m = self.dg.len();
        if m == 0 {
            return None;
        }
        let mut gram = vec![vec![0.0; m]; m];
        let mut scale = 0.0_f64;
        for i in 0..m {
            for j in 0..=i {
                let v = dot(&self.dg[i], &self.dg[j]);
                gram[i][j] = v;
                gram[j][i] = v;
            }
            scale = scale.max(gram[i][i]);
        }
        for (i, row) in gram.iter_mut().enumerate() {
            row[i] += self.regularization * scale.max(f64::MIN_POSITIVE);
        }
        let rhs: Vec<f64> = self.dg.iter().map(|y| dot(y, g)).collect();
        let gamma = cholesky_solve(&gram, &rhs)?;
        let mut out: Vec<f64> = w.iter().zip(g).map(|(a, b)| a + b).collect();
        for (k, &c) in gamma.iter().enumerate() {
            for ((o, s), y) in out.iter_mut().zip(&self.dw[k]).zip(&self.dg[k]) {
                *o -= c * (s + y);
            }
        }
        out.iter().all(|v| v.is_finite()).then_some(out)
    }
}
