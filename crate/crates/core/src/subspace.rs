//! Orthonormal bases of proper subspaces, orthogonal projectors, and the
//! sine of the largest principal angle.

use crate::error::{Error, Result};
use crate::eigen::EigenSystem;
use crate::matrix::{Matrix, SymmetricMatrix};

/// Orthonormal basis of a k-dimensional subspace of R^m, 1 ≤ k < m.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    dim: usize,
    k: usize,
    basis: Matrix,
}

impl SubspaceBasis {
    /// Wrap an m×k matrix with orthonormal columns
    /// (‖BᵀB − I_k‖_max ≤ 1e−10).
    pub fn new(basis: Matrix) -> Result<Self> {
        let (m, k) = (basis.rows(), basis.cols());
        if k == 0 || k >= m {
            return Err(Error::InvalidArgument(format!(
                "subspace dimension k={k} must satisfy 1 <= k < m={m}"
            )));
        }
        if !basis.is_finite() {
            return Err(Error::InvalidArgument("basis entries must be finite".into()));
        }
        let gram = basis.transpose().matmul(&basis);
        let dev = gram.sub(&Matrix::identity(k)).max_abs();
        if dev > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "basis columns not orthonormal: max Gram deviation {dev:e}"
            )));
        }
        Ok(SubspaceBasis { dim: m, k, basis })
    }

    /// The span of the leading k eigenvectors of an eigensystem.
    pub fn from_leading(eig: &EigenSystem, k: usize) -> Result<Self> {
        SubspaceBasis::new(eig.leading_vectors(k))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Orthogonal projector P = BBᵀ onto the subspace.
    pub fn projector(&self) -> SymmetricMatrix {
        let p = self.basis.matmul(&self.basis.transpose());
        SymmetricMatrix::new(self.dim, p.data().to_vec())
            .expect("projector entries are finite")
            .with_psd_hint()
    }
}

/// Sine of the largest principal angle between two equi-dimensional
/// subspaces, computed as ‖B₁B₁ᵀ − B₂B₂ᵀ‖₂ (the definition we report).
///
/// The alternative route √(1 − σ_min(B₁ᵀB₂)²) is evaluated as well and
/// cross-checked on the squared sines: near θ = 0 the subtraction
/// 1 − σ_min² cancels half the mantissa, so the squares are the quantity
/// both routes determine to full precision.
pub fn principal_angle_sin(s1: &SubspaceBasis, s2: &SubspaceBasis) -> Result<f64> {
    if s1.dim() != s2.dim() || s1.k() != s2.k() {
        return Err(Error::InvalidArgument(format!(
            "subspace mismatch: ({}, k={}) vs ({}, k={})",
            s1.dim(),
            s1.k(),
            s2.dim(),
            s2.k()
        )));
    }
    let diff = s1.projector().sub(&s2.projector())?;
    let sin_proj = diff.spectral_norm();

    let cross = s1.basis().transpose().matmul(s2.basis());
    let gram = cross.transpose().matmul(&cross);
    let gram = SymmetricMatrix::new(gram.rows(), gram.data().to_vec())?;
    let smallest = gram
        .eigh()?
        .values()
        .last()
        .copied()
        .expect("k >= 1")
        .clamp(0.0, 1.0);
    let sin_sq_gram = 1.0 - smallest;

    let sin_sq_proj = sin_proj * sin_proj;
    if (sin_sq_proj - sin_sq_gram).abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "principal angle routes disagree: projector {sin_sq_proj:e} vs cross-Gram {sin_sq_gram:e} (squared sines)"
        )));
    }
    Ok(sin_proj.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(cols: &[Vec<f64>]) -> SubspaceBasis {
        let m = cols[0].len();
        let k = cols.len();
        SubspaceBasis::new(Matrix::from_fn(m, k, |i, j| cols[j][i])).unwrap()
    }

    #[test]
    fn identical_bases_have_zero_angle() {
        let b = span(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        let s = principal_angle_sin(&b, &b).unwrap();
        assert!(s <= 1e-12, "sin = {s}");
    }

    #[test]
    fn orthogonal_lines_in_the_plane() {
        let e1 = span(&[vec![1.0, 0.0]]);
        let e2 = span(&[vec![0.0, 1.0]]);
        let s = principal_angle_sin(&e1, &e2).unwrap();
        assert!((s - 1.0).abs() <= 1e-12, "sin = {s}");
    }

    #[test]
    fn planar_rotation_angle() {
        let theta: f64 = 0.3;
        let e1 = span(&[vec![1.0, 0.0]]);
        let r = span(&[vec![theta.cos(), theta.sin()]]);
        let s = principal_angle_sin(&e1, &r).unwrap();
        assert!((s - theta.sin()).abs() <= 1e-10, "sin = {s}");
    }

    #[test]
    fn mismatched_dims_rejected() {
        let a = span(&[vec![1.0, 0.0, 0.0]]);
        let b = span(&[vec![1.0, 0.0]]);
        assert!(principal_angle_sin(&a, &b).is_err());
    }

    #[test]
    fn projector_of_a_coordinate_line() {
        let e1 = span(&[vec![1.0, 0.0]]);
        let p = e1.projector();
        assert_eq!(p.at(0, 0), 1.0);
        assert_eq!(p.at(0, 1), 0.0);
        assert_eq!(p.at(1, 1), 0.0);
    }

    #[test]
    fn full_dimension_basis_rejected() {
        let full = Matrix::identity(3);
        assert!(SubspaceBasis::new(full).is_err());
    }

    #[test]
    fn non_orthonormal_rejected() {
        let b = Matrix::from_fn(3, 1, |i, _| if i == 0 { 2.0 } else { 0.0 });
        assert!(SubspaceBasis::new(b).is_err());
    }
}
