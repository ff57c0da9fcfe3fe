//! Seeded samplers.
//!
//! Every sampler takes an explicit [`SeedSpec`]. The generator is ChaCha20
//! keyed by `seed` with the ChaCha stream id set to `stream_index`, so
//! distinct stream indices give independent sequences and a given
//! `(seed, stream_index)` always reproduces the same sample. Gaussian variates
//! come from Box-Muller on 53-bit uniforms taken from successive `u64` draws.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{DensityMatrix, PureState};
use crate::linalg::{CMatrix, Hermitian};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Uniform in (0, 1], never exactly zero so `ln` is finite.
fn uniform_open(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

/// Standard complex Gaussian with independent N(0,1) real and imaginary parts.
fn complex_gaussian(rng: &mut impl RngCore) -> Complex64 {
    let u1 = uniform_open(rng);
    let u2 = uniform_open(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    Complex64::new(r * c, r * s)
}

/// Hilbert-Schmidt random density matrix `G G^dagger / Tr(G G^dagger)` with
/// `G` a `d x d` Ginibre matrix.
pub fn random_density_hs(d: usize, seed: SeedSpec) -> DensityMatrix {
    assert!(d >= 1);
    let mut rng = seed.rng();
    let g = CMatrix::from_fn(d, d, |_, _| complex_gaussian(&mut rng));
    let w = g.matmul(&g.adjoint());
    let tr = w.trace().re;
    DensityMatrix(Hermitian::from_hermitian_part(&w.scale(1.0 / tr)))
}

/// Haar-random pure state from a normalised complex Gaussian vector.
pub fn random_pure(d: usize, seed: SeedSpec) -> PureState {
    assert!(d >= 1);
    let mut rng = seed.rng();
    let v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(&mut rng)).collect();
    PureState::new(v).expect("Gaussian vector is nonzero with probability one")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Per-entry check that the sample mean of `samples` is within three
    /// standard errors of `I/d`.
    fn mean_is_maximally_mixed(d: usize, samples: &[CMatrix]) {
        let n = samples.len() as f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 / d as f64 } else { 0.0 };
                for part in 0..2 {
                    let xs: Vec<f64> = samples
                        .iter()
                        .map(|m| {
                            if part == 0 {
                                m[(i, j)].re
                            } else {
                                m[(i, j)].im
                            }
                        })
                        .collect();
                    let mean = xs.iter().sum::<f64>() / n;
                    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
                    if var == 0.0 {
                        assert!((mean - if part == 0 { target } else { 0.0 }).abs() < 1e-12);
                        continue;
                    }
                    let se = (var / n).sqrt();
                    let t = if part == 0 { target } else { 0.0 };
                    assert!(
                        (mean - t).abs() <= 3.0 * se,
                        "entry ({i},{j}) part {part}: {mean} vs {t} (se {se})"
                    );
                }
            }
        }
    }

    #[test]
    fn hs_states_are_valid_and_reproducible() {
        for d in [2, 3, 4] {
            for k in 0..200 {
                let rho = random_density_hs(d, SeedSpec::new(7, k));
                DensityMatrix::new(rho.operator().clone()).unwrap();
            }
        }
        let a = random_density_hs(3, SeedSpec::new(11, 5));
        let b = random_density_hs(3, SeedSpec::new(11, 5));
        assert_eq!(a, b);
        let c = random_density_hs(3, SeedSpec::new(11, 6));
        assert_ne!(a, c);
    }

    #[test]
    fn hs_mean_is_maximally_mixed() {
        let d = 3;
        let samples: Vec<CMatrix> = (0..10_000)
            .map(|k| {
                random_density_hs(d, SeedSpec::new(2024, k))
                    .matrix()
                    .clone()
            })
            .collect();
        mean_is_maximally_mixed(d, &samples);
    }

    #[test]
    fn pure_states_normalised_and_mean_is_maximally_mixed() {
        let d = 3;
        let a = random_pure(d, SeedSpec::new(3, 9));
        assert!((a.norm() - 1.0).abs() < 1e-14);
        assert_eq!(a, random_pure(d, SeedSpec::new(3, 9)));
        let samples: Vec<CMatrix> = (0..10_000)
            .map(|k| {
                random_pure(d, SeedSpec::new(99, k))
                    .density()
                    .matrix()
                    .clone()
            })
            .collect();
        mean_is_maximally_mixed(d, &samples);
    }
}
