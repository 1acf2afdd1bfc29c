//! Dense matrix storage: a minimal general matrix plus the symmetric type
//! used throughout the crate.
//!
//! Matrices here are small (desk scale, dimensions in the hundreds at most),
//! so everything is plain row-major `Vec<f64>` with explicit loops.

use std::fmt::Write as _;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix. Internal workhorse for bases, batches, and
/// eigenvector storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(Error::InvalidArgument("matrix needs at least one column".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::InvalidArgument(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    r.len(),
                    cols
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Plain triple-loop product.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must match");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest singular value, computed as the square root of the top
    /// eigenvalue of the Gram matrix. Used for rectangular blocks.
    pub fn spectral_norm(&self) -> f64 {
        // Gram on the smaller side keeps the eig cheap.
        let g = if self.rows >= self.cols {
            let t = self.transpose();
            t.matmul(self)
        } else {
            self.matmul(&self.transpose())
        };
        let sym = SymmetricMatrix::new(g.rows, g.data).expect("gram matrix is square and finite");
        let top = sym
            .eigh()
            .expect("jacobi converges on finite symmetric input")
            .values()[0];
        top.max(0.0).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Dense real symmetric matrix.
///
/// Construction symmetrizes the input as `(A + Aᵀ)/2`, so
/// `entries(i,j) == entries(j,i)` holds exactly afterwards. `psd_hint`
/// records that the construction route guarantees positive
/// semi-definiteness (e.g. averages of outer products); it is a promise
/// by the constructor, checkable with [`SymmetricMatrix::check_psd`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMatrix {
    dim: usize,
    entries: Vec<f64>,
    psd_hint: bool,
}

/// Relative tolerance on the smallest eigenvalue when checking the PSD
/// promise in floating point.
pub const TOL_PSD: f64 = 1e-10;

impl SymmetricMatrix {
    /// Build from row-major entries, symmetrizing `(A + Aᵀ)/2`.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if !entries.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        let mut sym = entries;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (sym[i * dim + j] + sym[j * dim + i]);
                sym[i * dim + j] = avg;
                sym[j * dim + i] = avg;
            }
        }
        Ok(SymmetricMatrix {
            dim,
            entries: sym,
            psd_hint: false,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        if m.rows() != m.cols() {
            return Err(Error::InvalidArgument(format!(
                "symmetric matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        SymmetricMatrix::new(m.rows(), m.data().to_vec())
    }

    pub fn zeros(dim: usize) -> Self {
        SymmetricMatrix {
            dim,
            entries: vec![0.0; dim * dim],
            psd_hint: true,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut s = SymmetricMatrix::zeros(dim);
        for i in 0..dim {
            s.entries[i * dim + i] = 1.0;
        }
        s
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let dim = values.len();
        let mut s = SymmetricMatrix::new(dim, vec![0.0; dim * dim])?;
        for i in 0..dim {
            s.entries[i * dim + i] = values[i];
        }
        s.psd_hint = values.iter().all(|v| *v >= 0.0);
        Ok(s)
    }

    /// Mark the matrix as PSD-by-construction.
    pub fn with_psd_hint(mut self) -> Self {
        self.psd_hint = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn psd_hint(&self) -> bool {
        self.psd_hint
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Diagonal sum, accumulated in index order.
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.at(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            rows: self.dim,
            cols: self.dim,
            data: self.entries.clone(),
        }
    }

    pub fn add(&self, other: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &SymmetricMatrix, f: impl Fn(f64, f64) -> f64) -> Result<SymmetricMatrix> {
        if self.dim != other.dim {
            return Err(Error::InvalidArgument(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(SymmetricMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            psd_hint: false,
        })
    }

    pub fn scale(&self, c: f64) -> SymmetricMatrix {
        SymmetricMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|v| c * v).collect(),
            psd_hint: self.psd_hint && c >= 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.to_matrix().matvec(x)
    }

    /// Verify the PSD promise: smallest eigenvalue ≥ −`TOL_PSD`·‖A‖₂.
    pub fn check_psd(&self) -> Result<()> {
        let eig = self.eigh()?;
        let norm = eig.spectral_norm();
        let smallest = *eig.values().last().expect("dim >= 1");
        if smallest < -TOL_PSD * norm {
            return Err(Error::Domain(format!(
                "matrix is not positive semi-definite: smallest eigenvalue {smallest:e} \
                 below -{TOL_PSD:e} * norm ({norm:e})"
            )));
        }
        Ok(())
    }

    /// Parse the plain-text matrix format: first line the dimension `m`,
    /// then `m` lines of `m` whitespace-separated entries. The parsed
    /// matrix is symmetrized like any other construction.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let dim_line = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let dim: usize = dim_line
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("invalid dimension line {dim_line:?}")))?;
        if dim == 0 {
            return Err(Error::Parse("matrix dimension must be positive".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("expected {dim} rows, found {i}")))?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("invalid entry {tok:?} in row {i}")))
                })
                .collect::<Result<_>>()?;
            if row.len() != dim {
                return Err(Error::Parse(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        SymmetricMatrix::new(dim, entries).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_text_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_text(&text)
    }

    /// Serialize in the plain-text matrix format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.dim);
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|j| format!("{}", self.at(i, j))).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_symmetrizes() {
        let a = SymmetricMatrix::new(2, vec![1.0, 2.0, 4.0, 3.0]).unwrap();
        assert_eq!(a.at(0, 1), 3.0);
        assert_eq!(a.at(1, 0), 3.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(SymmetricMatrix::new(2, vec![1.0, f64::NAN, 0.0, 1.0]).is_err());
    }

    #[test]
    fn text_format_round_trip() {
        let a = SymmetricMatrix::from_rows(&[
            vec![1.5, -0.25, 0.0],
            vec![-0.25, 2.0, 1.0],
            vec![0.0, 1.0, 0.125],
        ])
        .unwrap();
        let b = SymmetricMatrix::parse_text(&a.to_text()).unwrap();
        assert_eq!(a.entries(), b.entries());
    }

    #[test]
    fn text_format_symmetrizes_on_parse() {
        let parsed = SymmetricMatrix::parse_text("2\n1 4\n2 1\n").unwrap();
        assert_eq!(parsed.at(0, 1), 3.0);
    }

    #[test]
    fn text_format_parse_errors() {
        assert!(SymmetricMatrix::parse_text("").is_err());
        assert!(SymmetricMatrix::parse_text("x\n1\n").is_err());
        assert!(SymmetricMatrix::parse_text("2\n1 2\n").is_err());
        assert!(SymmetricMatrix::parse_text("2\n1 2\n3\n").is_err());
        assert!(SymmetricMatrix::parse_text("2\n1 b\n3 4\n").is_err());
    }

    #[test]
    fn matmul_and_transpose() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let c = a.matmul(&b);
        assert_eq!(c[(0, 0)], 2.0);
        assert_eq!(c[(0, 1)], 1.0);
        assert_eq!(a.transpose()[(0, 1)], 3.0);
    }
}
