//! Symmetric eigendecomposition via cyclic Jacobi rotations.
//!
//! Jacobi is slower than tridiagonalization for large matrices but is
//! exactly what we want at desk scale: the accumulated rotation matrix is
//! orthogonal to machine precision, the sweep order is fixed, and the
//! result is bit-for-bit reproducible for a given input.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, SymmetricMatrix};

/// Maximum number of cyclic sweeps before giving up. Jacobi converges
/// quadratically; well under ten sweeps suffice for the sizes we handle.
const MAX_SWEEPS: usize = 64;

/// Off-diagonal Frobenius target, relative to the input Frobenius norm.
const OFF_TOL: f64 = 1e-15;

/// Eigenvalues and eigenvectors of a symmetric matrix.
///
/// Eigenvalues are sorted non-increasing; column `j` of `vectors` is the
/// eigenvector paired with `values[j]`. Ties keep the sweep output order
/// (the sort is stable), so nothing downstream may rely on eigenvector
/// identity inside a repeated eigenvalue — only on subspace invariants.
#[derive(Debug, Clone, Serialize)]
pub struct EigenSystem {
    values: Vec<f64>,
    vectors: Matrix,
}

impl EigenSystem {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// max |λ_i|; with the sorted order this is attained at an end.
    pub fn spectral_norm(&self) -> f64 {
        let first = self.values[0].abs();
        let last = self.values[self.values.len() - 1].abs();
        first.max(last)
    }

    /// λ_k − λ_{k+1} for 1 ≤ k < m (1-based split index).
    pub fn gap_at(&self, k: usize) -> Result<f64> {
        if k == 0 || k >= self.dim() {
            return Err(Error::InvalidArgument(format!(
                "split index k={k} out of range 1..{}",
                self.dim()
            )));
        }
        Ok(self.values[k - 1] - self.values[k])
    }

    /// The m×k matrix of leading eigenvectors.
    pub fn leading_vectors(&self, k: usize) -> Matrix {
        let m = self.dim();
        Matrix::from_fn(m, k, |i, j| self.vectors[(i, j)])
    }

    /// V diag(λ) Vᵀ, for reconstruction checks.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let m = self.dim();
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                let mut s = 0.0;
                for (l, lam) in self.values.iter().enumerate() {
                    s += self.vectors[(i, l)] * lam * self.vectors[(j, l)];
                }
                out[i * m + j] = s;
            }
        }
        SymmetricMatrix::new(m, out).expect("reconstruction is finite")
    }

    /// Check the type invariants against the source matrix:
    /// orthonormality of V, the residual ‖AV − VΛ‖₂, and the sort order.
    pub fn validate(&self, source: &SymmetricMatrix) -> Result<()> {
        let m = self.dim();
        let vt_v = self.vectors.transpose().matmul(&self.vectors);
        let ortho_dev = vt_v.sub(&Matrix::identity(m)).max_abs();
        if ortho_dev > 1e-10 {
            return Err(Error::Numerical(format!(
                "eigenvector matrix not orthonormal: max deviation {ortho_dev:e}"
            )));
        }
        let av = source.to_matrix().matmul(&self.vectors);
        let vl = Matrix::from_fn(m, m, |i, j| self.vectors[(i, j)] * self.values[j]);
        let residual = av.sub(&vl).spectral_norm();
        let norm = self.spectral_norm();
        if residual > 1e-8 * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::Numerical(format!(
                "eigen residual {residual:e} exceeds 1e-8 * norm ({norm:e})"
            )));
        }
        if self.values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Numerical("eigenvalues not sorted non-increasing".into()));
        }
        Ok(())
    }
}

impl SymmetricMatrix {
    /// Full eigendecomposition. Deterministic: fixed cyclic sweep order,
    /// stable descending sort.
    pub fn eigh(&self) -> Result<EigenSystem> {
        jacobi(self, MAX_SWEEPS)
    }

    /// max |λ_i|.
    pub fn spectral_norm(&self) -> f64 {
        self.eigh()
            .expect("jacobi converges on finite symmetric input")
            .spectral_norm()
    }

    /// trace(A)/‖A‖₂ for nonzero PSD `A`. The ratio is at least 1 in exact
    /// arithmetic; rounding is clamped away.
    pub fn intrinsic_dimension(&self) -> Result<f64> {
        let eig = self.eigh()?;
        let norm = eig.spectral_norm();
        if norm == 0.0 {
            return Err(Error::Domain("intdim undefined for zero matrix".into()));
        }
        let smallest = *eig.values().last().expect("dim >= 1");
        if smallest < -crate::matrix::TOL_PSD * norm {
            return Err(Error::Domain(format!(
                "intdim requires a PSD matrix; smallest eigenvalue {smallest:e}"
            )));
        }
        Ok((self.trace() / norm).max(1.0))
    }
}

/// Cyclic Jacobi with the rotation pairs visited in row-major order
/// (p = 0..m−1, q = p+1..m). Exposed with an explicit sweep cap so the
/// non-convergence path is testable.
pub(crate) fn jacobi(a: &SymmetricMatrix, max_sweeps: usize) -> Result<EigenSystem> {
    let m = a.dim();
    let mut w = a.to_matrix();
    let mut v = Matrix::identity(m);

    let fro = w.frobenius_norm();
    let target = OFF_TOL * fro;

    let mut off = off_diagonal_norm(&w);
    if off <= target {
        return Ok(sorted_system(&w, v));
    }

    for _ in 0..max_sweeps {
        for p in 0..m.saturating_sub(1) {
            for q in (p + 1)..m {
                let apq = w[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = w[(p, p)];
                let aqq = w[(q, q)];
                // Stable rotation: t = sign(θ)/(|θ| + sqrt(θ²+1)).
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                w[(p, p)] = app - t * apq;
                w[(q, q)] = aqq + t * apq;
                w[(p, q)] = 0.0;
                w[(q, p)] = 0.0;
                for i in 0..m {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = w[(i, p)];
                    let aiq = w[(i, q)];
                    let new_ip = aip - s * (aiq + tau * aip);
                    let new_iq = aiq + s * (aip - tau * aiq);
                    w[(i, p)] = new_ip;
                    w[(p, i)] = new_ip;
                    w[(i, q)] = new_iq;
                    w[(q, i)] = new_iq;
                }
                for i in 0..m {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip - s * (viq + tau * vip);
                    v[(i, q)] = viq + s * (vip - tau * viq);
                }
            }
        }
        off = off_diagonal_norm(&w);
        if off <= target {
            return Ok(sorted_system(&w, v));
        }
    }

    Err(Error::NoConvergence {
        sweeps: max_sweeps,
        residual: off,
    })
}

fn off_diagonal_norm(w: &Matrix) -> f64 {
    let m = w.rows();
    let mut s = 0.0;
    for p in 0..m {
        for q in (p + 1)..m {
            s += 2.0 * w[(p, q)] * w[(p, q)];
        }
    }
    s.sqrt()
}

fn sorted_system(w: &Matrix, v: Matrix) -> EigenSystem {
    let m = w.rows();
    let mut order: Vec<usize> = (0..m).collect();
    // Stable sort: ties preserve sweep output order.
    order.sort_by(|&a, &b| w[(b, b)].partial_cmp(&w[(a, a)]).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&j| w[(j, j)]).collect();
    let vectors = Matrix::from_fn(m, m, |i, j| v[(i, order[j])]);
    EigenSystem { values, vectors }
}
