//! Random matrix ensembles for stress tests and benchmarks.
//!
//! The generator recipe is fixed so that any failing instance can be
//! reproduced from its seed: orthogonal factors are Haar-distributed
//! (QR of a Gaussian matrix with the R diagonal forced positive),
//! spectra are caller-specified, and perturbations are symmetric
//! Gaussian rescaled to an exact target spectral norm.

use crate::matrix::{Matrix, SymmetricMatrix};
use crate::rng::{standard_normal, unit_uniform, Rng};

/// Haar-distributed orthogonal m×m matrix: modified Gram-Schmidt QR of a
/// standard Gaussian matrix, sign-fixed so R has a positive diagonal.
pub fn haar_orthogonal(m: usize, rng: &mut Rng) -> Matrix {
    let g = Matrix::from_fn(m, m, |_, _| standard_normal(rng));
    let mut q = g;
    for j in 0..m {
        for prev in 0..j {
            let dot: f64 = (0..m).map(|i| q[(i, prev)] * q[(i, j)]).sum();
            for i in 0..m {
                q[(i, j)] -= dot * q[(i, prev)];
            }
        }
        let norm: f64 = (0..m).map(|i| q[(i, j)] * q[(i, j)]).sum::<f64>().sqrt();
        // A Gaussian column is almost surely independent of its
        // predecessors; guard the measure-zero event anyway.
        let inv = if norm > 0.0 { 1.0 / norm } else { 0.0 };
        for i in 0..m {
            q[(i, j)] *= inv;
        }
    }
    q
}

/// Q diag(spectrum) Qᵀ with Haar-random Q.
pub fn matrix_with_spectrum(spectrum: &[f64], rng: &mut Rng) -> SymmetricMatrix {
    let m = spectrum.len();
    let q = haar_orthogonal(m, rng);
    let mut entries = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = 0.0;
            for (l, lam) in spectrum.iter().enumerate() {
                s += q[(i, l)] * lam * q[(j, l)];
            }
            entries[i * m + j] = s;
        }
    }
    SymmetricMatrix::new(m, entries).expect("finite spectrum gives finite matrix")
}

/// Non-increasing spectrum of length m with a guaranteed gap after the
/// k-th value: the leading k values live in [1+gap, 2+gap], the rest in
/// [0, 1]. Always consumes exactly m uniform draws.
pub fn gapped_spectrum(m: usize, k: usize, gap: f64, rng: &mut Rng) -> Vec<f64> {
    assert!(k >= 1 && k < m, "need 1 <= k < m");
    let mut head: Vec<f64> = (0..k).map(|_| 1.0 + gap + unit_uniform(rng)).collect();
    let mut tail: Vec<f64> = (k..m).map(|_| unit_uniform(rng)).collect();
    head.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    tail.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    head.extend(tail);
    head
}

/// Symmetric Gaussian matrix rescaled so its spectral norm equals
/// `target_norm`.
pub fn symmetric_perturbation(m: usize, target_norm: f64, rng: &mut Rng) -> SymmetricMatrix {
    loop {
        let g = Matrix::from_fn(m, m, |_, _| standard_normal(rng));
        let sym = SymmetricMatrix::new(m, g.data().to_vec()).expect("finite");
        let norm = sym.spectral_norm();
        if norm > 0.0 {
            return sym.scale(target_norm / norm);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn haar_factor_is_orthogonal() {
        let mut rng = rng_from_seed(1);
        let q = haar_orthogonal(6, &mut rng);
        let dev = q.transpose().matmul(&q).sub(&Matrix::identity(6)).max_abs();
        assert!(dev < 1e-12, "deviation {dev}");
    }

    #[test]
    fn spectrum_is_reproduced() {
        let mut rng = rng_from_seed(2);
        let spectrum = [3.0, 1.5, 0.25, 0.0];
        let a = matrix_with_spectrum(&spectrum, &mut rng);
        let eig = a.eigh().unwrap();
        for (got, want) in eig.values().iter().zip(&spectrum) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn perturbation_hits_target_norm() {
        let mut rng = rng_from_seed(3);
        let p = symmetric_perturbation(5, 0.125, &mut rng);
        assert!((p.spectral_norm() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn gapped_spectrum_has_gap() {
        let mut rng = rng_from_seed(4);
        let s = gapped_spectrum(8, 3, 0.5, &mut rng);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        assert!(s[2] - s[3] >= 0.5);
    }
}
