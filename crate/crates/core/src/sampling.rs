//! Gradient sampling: built-in test functions with analytically known
//! second-moment matrices, Monte Carlo batches, and the outer-product
//! estimator.
//!
//! Every builtin samples points uniformly from the hypercube [-1, 1]^m.
//! The compact support is what makes the gradient bound finite and the
//! ground-truth moment matrix closed-form; an unbounded density (e.g.
//! Gaussian) would break the boundedness requirement the certificates
//! rest on, so none is offered.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, SymmetricMatrix};
use crate::quadrature::mean_cos;
use crate::rng::{rng_from_seed, symmetric_uniform, Rng};

/// Relative slack for the online gradient-norm check: distinguishes a
/// genuinely wrong user-supplied bound from float noise.
const GRADIENT_CHECK_SLACK: f64 = 1e-12;

/// Hard cap for the quadratic builtin, whose exact gradient bound is
/// found by enumerating hypercube vertices.
pub const MAX_QUADRATIC_DIM: usize = 20;

/// The family of a built-in test function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FunctionKind {
    /// f(x) = cᵀx. Constant gradient, zero-variance estimator.
    Linear { coeffs: Vec<f64> },
    /// f(x) = ½ xᵀAx with symmetric A; gradient Ax.
    Quadratic { matrix: SymmetricMatrix },
    /// f(x) = Σ_i a_i sin(d_iᵀx) with orthonormal directions d_i.
    /// Tunable spectra: amplitudes control the nonzero eigenvalues.
    RidgeSum {
        directions: Vec<Vec<f64>>,
        amplitudes: Vec<f64>,
    },
}

impl FunctionKind {
    pub fn name(&self) -> &'static str {
        match self {
            FunctionKind::Linear { .. } => "linear",
            FunctionKind::Quadratic { .. } => "quadratic",
            FunctionKind::RidgeSum { .. } => "ridge_sum",
        }
    }
}

/// A sampled function: gradient oracle, point sampler, gradient bound,
/// and (for all builtins) the analytic second-moment matrix
/// E = mean of ∇f(X)∇f(X)ᵀ.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    dim: usize,
    kind: FunctionKind,
    /// Uniform bound on ‖∇f(x)‖₂ over the support of the sampling density.
    pub lipschitz_l: f64,
    analytic_e: Option<SymmetricMatrix>,
}

impl SampledFunction {
    /// f(x) = cᵀx on the hypercube. E = ccᵀ exactly; the estimator has
    /// zero variance.
    pub fn linear(coeffs: Vec<f64>) -> Result<Self> {
        let dim = coeffs.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("coefficient vector must be non-empty".into()));
        }
        if !coeffs.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        let norm_sq: f64 = coeffs.iter().map(|c| c * c).sum();
        if norm_sq == 0.0 {
            return Err(Error::InvalidArgument("coefficient vector must be nonzero".into()));
        }
        let mut e = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                e[i * dim + j] = coeffs[i] * coeffs[j];
            }
        }
        let analytic_e = SymmetricMatrix::new(dim, e)?.with_psd_hint();
        Ok(SampledFunction {
            dim,
            kind: FunctionKind::Linear { coeffs },
            lipschitz_l: norm_sq.sqrt(),
            analytic_e: Some(analytic_e),
        })
    }

    /// f(x) = ½ xᵀAx on the hypercube. With E[xxᵀ] = I/3 the moment matrix
    /// is A²/3. The gradient bound is exact: ‖Ax‖₂ is convex, so its
    /// maximum over the cube sits at a vertex; all 2^(m−1) sign patterns
    /// are enumerated (v and −v give the same norm), hence the size cap.
    pub fn quadratic(matrix: SymmetricMatrix) -> Result<Self> {
        let dim = matrix.dim();
        if dim > MAX_QUADRATIC_DIM {
            return Err(Error::UnsupportedSize(format!(
                "quadratic builtin enumerates 2^(m-1) vertices; m={dim} exceeds the cap of {MAX_QUADRATIC_DIM}"
            )));
        }
        if matrix.entries().iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidArgument("quadratic matrix must be nonzero".into()));
        }
        let a = matrix.to_matrix();
        let e = a.matmul(&a).scale(1.0 / 3.0);
        let analytic_e = SymmetricMatrix::new(dim, e.data().to_vec())?.with_psd_hint();
        let lipschitz_l = max_vertex_image_norm(&matrix);
        Ok(SampledFunction {
            dim,
            kind: FunctionKind::Quadratic { matrix },
            lipschitz_l,
            analytic_e: Some(analytic_e),
        })
    }

    /// f(x) = Σ_i a_i sin(d_iᵀx) with orthonormal directions. The moment
    /// matrix is Σ_{i,j} a_i a_j c_ij d_i d_jᵀ, where each weight c_ij is a
    /// product of one-dimensional cosine means, evaluated by quadrature and
    /// cached here at construction — ground truth never touches the Monte
    /// Carlo path. The gradient bound is Σ|a_i|.
    pub fn ridge_sum(directions: Vec<Vec<f64>>, amplitudes: Vec<f64>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::InvalidArgument("ridge sum needs at least one direction".into()));
        }
        if directions.len() != amplitudes.len() {
            return Err(Error::InvalidArgument(format!(
                "{} directions but {} amplitudes",
                directions.len(),
                amplitudes.len()
            )));
        }
        let dim = directions[0].len();
        if dim == 0 {
            return Err(Error::InvalidArgument("directions must be non-empty vectors".into()));
        }
        for (i, d) in directions.iter().enumerate() {
            if d.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "direction {i} has length {}, expected {dim}",
                    d.len()
                )));
            }
            if !d.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidArgument("directions must be finite".into()));
            }
        }
        if !amplitudes.iter().all(|a| a.is_finite()) {
            return Err(Error::InvalidArgument("amplitudes must be finite".into()));
        }
        for i in 0..directions.len() {
            for j in i..directions.len() {
                let dot: f64 = directions[i].iter().zip(&directions[j]).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot - target).abs() > 1e-10 {
                    return Err(Error::InvalidArgument(format!(
                        "directions {i} and {j} are not orthonormal: <d_i, d_j> = {dot}"
                    )));
                }
            }
        }

        let p = directions.len();
        let mut weights = vec![0.0; p * p];
        for i in 0..p {
            for j in i..p {
                let c = cosine_pair_mean(&directions[i], &directions[j]);
                weights[i * p + j] = c;
                weights[j * p + i] = c;
            }
        }
        let mut e = vec![0.0; dim * dim];
        for i in 0..p {
            for j in 0..p {
                let w = amplitudes[i] * amplitudes[j] * weights[i * p + j];
                if w == 0.0 {
                    continue;
                }
                for r in 0..dim {
                    for c in 0..dim {
                        e[r * dim + c] += w * directions[i][r] * directions[j][c];
                    }
                }
            }
        }
        let analytic_e = SymmetricMatrix::new(dim, e)?.with_psd_hint();
        let lipschitz_l = amplitudes.iter().map(|a| a.abs()).sum();
        Ok(SampledFunction {
            dim,
            kind: FunctionKind::RidgeSum {
                directions,
                amplitudes,
            },
            lipschitz_l,
            analytic_e: Some(analytic_e),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn analytic_e(&self) -> Option<&SymmetricMatrix> {
        self.analytic_e.as_ref()
    }

    /// Drop the analytic moment matrix (simulates a function whose ground
    /// truth is unknown; error paths downstream become reachable).
    pub fn without_analytic_e(mut self) -> Self {
        self.analytic_e = None;
        self
    }

    /// ∇f at a point.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        match &self.kind {
            FunctionKind::Linear { coeffs } => coeffs.clone(),
            FunctionKind::Quadratic { matrix } => matrix.matvec(x),
            FunctionKind::RidgeSum {
                directions,
                amplitudes,
            } => {
                let mut g = vec![0.0; self.dim];
                for (d, a) in directions.iter().zip(amplitudes) {
                    let u: f64 = d.iter().zip(x).map(|(di, xi)| di * xi).sum();
                    let scale = a * u.cos();
                    for (gi, di) in g.iter_mut().zip(d) {
                        *gi += scale * di;
                    }
                }
                g
            }
        }
    }

    /// Draw one point from the sampling density (uniform on [-1,1]^m),
    /// consuming exactly `dim` RNG draws in coordinate order.
    pub fn sample_point(&self, rng: &mut Rng) -> Vec<f64> {
        (0..self.dim).map(|_| symmetric_uniform(rng)).collect()
    }

    /// Embed into a larger ambient dimension by appending inactive
    /// coordinates. The gradient bound, moment spectrum, and intrinsic
    /// dimension are unchanged.
    pub fn zero_pad(&self, target_dim: usize) -> Result<Self> {
        if target_dim < self.dim {
            return Err(Error::InvalidArgument(format!(
                "cannot pad dimension {} down to {target_dim}",
                self.dim
            )));
        }
        if target_dim == self.dim {
            return Ok(self.clone());
        }
        match &self.kind {
            FunctionKind::Linear { coeffs } => {
                let mut c = coeffs.clone();
                c.resize(target_dim, 0.0);
                SampledFunction::linear(c)
            }
            FunctionKind::Quadratic { matrix } => {
                let mut entries = vec![0.0; target_dim * target_dim];
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        entries[i * target_dim + j] = matrix.at(i, j);
                    }
                }
                SampledFunction::quadratic(SymmetricMatrix::new(target_dim, entries)?)
            }
            FunctionKind::RidgeSum {
                directions,
                amplitudes,
            } => {
                let dirs = directions
                    .iter()
                    .map(|d| {
                        let mut v = d.clone();
                        v.resize(target_dim, 0.0);
                        v
                    })
                    .collect();
                SampledFunction::ridge_sum(dirs, amplitudes.clone())
            }
        }
    }
}

/// Mean of cos(d_iᵀX)·cos(d_jᵀX) over the hypercube via the product-angle
/// identity: ½[Π_k g((d_i−d_j)_k) + Π_k g((d_i+d_j)_k)] with g the
/// one-dimensional cosine mean.
fn cosine_pair_mean(di: &[f64], dj: &[f64]) -> f64 {
    let mut prod_minus = 1.0;
    let mut prod_plus = 1.0;
    for (a, b) in di.iter().zip(dj) {
        let wm = a - b;
        let wp = a + b;
        if wm != 0.0 {
            prod_minus *= mean_cos(wm);
        }
        if wp != 0.0 {
            prod_plus *= mean_cos(wp);
        }
    }
    0.5 * (prod_minus + prod_plus)
}

/// max over hypercube vertices v of ‖Av‖₂ (exact gradient bound for the
/// quadratic builtin). Each vertex is evaluated from scratch so the value
/// is independent of enumeration order.
fn max_vertex_image_norm(a: &SymmetricMatrix) -> f64 {
    let m = a.dim();
    let entries = a.entries();
    let mut v = vec![1.0f64; m];
    let patterns: usize = 1 << (m - 1);
    let mut best = 0.0f64;
    for mask in 0..patterns {
        for b in 0..(m - 1) {
            v[b + 1] = if (mask >> b) & 1 == 1 { 1.0 } else { -1.0 };
        }
        let mut norm_sq = 0.0;
        for i in 0..m {
            let row = &entries[i * m..(i + 1) * m];
            let mut wi = 0.0;
            for j in 0..m {
                wi += row[j] * v[j];
            }
            norm_sq += wi * wi;
        }
        best = best.max(norm_sq);
    }
    best.sqrt()
}

/// A batch of gradient samples: row j is z_j = ∇f(x_j).
#[derive(Debug, Clone)]
pub struct SampleBatch {
    seed: u64,
    vectors: Matrix,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.vectors.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        self.vectors.row(j)
    }

    /// Assemble directly from vectors (testing and offline data).
    pub fn from_vectors(vectors: Matrix, seed: u64) -> Result<Self> {
        if vectors.rows() == 0 {
            return Err(Error::InvalidArgument("batch needs n >= 1 samples".into()));
        }
        if !vectors.is_finite() {
            return Err(Error::InvalidArgument("batch vectors must be finite".into()));
        }
        Ok(SampleBatch { seed, vectors })
    }

    /// Export one sample per row as CSV for offline inspection.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "# gradient samples: one z_j per row, seed={}", self.seed)?;
        for j in 0..self.len() {
            let row: Vec<String> = self.vector(j).iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Draw `n` i.i.d. gradient samples at points distributed per the
/// function's density. Reproducible: the seed fully determines the batch.
/// Every gradient norm is checked against the declared bound on the fly.
pub fn draw_batch(f: &SampledFunction, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::InvalidArgument("batch size n must be >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let limit = f.lipschitz_l * (1.0 + GRADIENT_CHECK_SLACK);
    let mut vectors = Matrix::zeros(n, f.dim());
    for j in 0..n {
        let x = f.sample_point(&mut rng);
        let z = f.gradient(&x);
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > limit {
            return Err(Error::ModelViolation(format!(
                "sample {j}: gradient norm {norm} exceeds declared bound {} (wrong Lipschitz bound?)",
                f.lipschitz_l
            )));
        }
        for (i, zi) in z.iter().enumerate() {
            vectors[(j, i)] = *zi;
        }
    }
    Ok(SampleBatch { seed, vectors })
}

/// Provenance of the batch behind an estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BatchProvenance {
    pub n: usize,
    pub seed: u64,
}

/// The Monte Carlo estimate Ê = (1/n) Σ z_j z_jᵀ.
#[derive(Debug, Clone)]
pub struct EstimatorResult {
    e_hat: SymmetricMatrix,
    provenance: BatchProvenance,
    rel_error: Option<f64>,
}

impl EstimatorResult {
    pub fn e_hat(&self) -> &SymmetricMatrix {
        &self.e_hat
    }

    pub fn provenance(&self) -> BatchProvenance {
        self.provenance
    }

    pub fn rel_error(&self) -> Option<f64> {
        self.rel_error
    }

    /// Fill in ‖Ê−E‖₂/‖E‖₂ against a known ground-truth matrix.
    pub fn with_reference(mut self, analytic_e: &SymmetricMatrix) -> Result<Self> {
        let diff = self.e_hat.sub(analytic_e)?;
        let norm_e = analytic_e.spectral_norm();
        if norm_e == 0.0 {
            return Err(Error::Domain("reference matrix must be nonzero".into()));
        }
        self.rel_error = Some(diff.spectral_norm() / norm_e);
        Ok(self)
    }
}

/// Average of sample outer products; symmetric PSD by construction.
pub fn estimate(batch: &SampleBatch) -> EstimatorResult {
    let n = batch.len();
    let m = batch.dim();
    let scale = 1.0 / n as f64;
    let mut entries = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let mut s = 0.0;
            for t in 0..n {
                let row = batch.vector(t);
                s += row[i] * row[j];
            }
            let v = s * scale;
            entries[i * m + j] = v;
            entries[j * m + i] = v;
        }
    }
    let e_hat = SymmetricMatrix::new(m, entries)
        .expect("finite batch gives finite estimate")
        .with_psd_hint();
    EstimatorResult {
        e_hat,
        provenance: BatchProvenance {
            n,
            seed: batch.seed(),
        },
        rel_error: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_gradient_is_constant() {
        let f = SampledFunction::linear(vec![0.5, -2.0]).unwrap();
        let batch = draw_batch(&f, 8, 3).unwrap();
        for j in 0..8 {
            assert_eq!(batch.vector(j), &[0.5, -2.0]);
        }
    }

    #[test]
    fn draw_batch_is_deterministic() {
        let f = SampledFunction::quadratic(SymmetricMatrix::diagonal(&[2.0, 1.0]).unwrap()).unwrap();
        let a = draw_batch(&f, 32, 99).unwrap();
        let b = draw_batch(&f, 32, 99).unwrap();
        for j in 0..32 {
            assert_eq!(a.vector(j), b.vector(j));
        }
    }

    #[test]
    fn zero_coefficients_rejected() {
        assert!(SampledFunction::linear(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn quadratic_analytic_values() {
        let f = SampledFunction::quadratic(SymmetricMatrix::diagonal(&[1.0, 0.0]).unwrap()).unwrap();
        let e = f.analytic_e().unwrap();
        assert!((e.at(0, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.at(1, 1), 0.0);
        assert_eq!(f.lipschitz_l, 1.0);

        let g = SampledFunction::quadratic(SymmetricMatrix::identity(2)).unwrap();
        let eg = g.analytic_e().unwrap();
        assert!((eg.at(0, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.lipschitz_l, 2.0f64.sqrt());
    }

    #[test]
    fn quadratic_intdim_example() {
        let f = SampledFunction::quadratic(SymmetricMatrix::diagonal(&[2.0, 1.0]).unwrap()).unwrap();
        let intdim = f.analytic_e().unwrap().intrinsic_dimension().unwrap();
        assert!((intdim - 1.25).abs() < 1e-12, "intdim = {intdim}");
    }

    #[test]
    fn quadratic_size_cap() {
        let big = SymmetricMatrix::identity(MAX_QUADRATIC_DIM + 1);
        assert!(matches!(
            SampledFunction::quadratic(big),
            Err(Error::UnsupportedSize(_))
        ));
    }

    #[test]
    fn model_violation_detected() {
        let mut f = SampledFunction::linear(vec![3.0, 4.0]).unwrap();
        f.lipschitz_l = 1.0;
        assert!(matches!(
            draw_batch(&f, 4, 0),
            Err(Error::ModelViolation(_))
        ));
    }

    #[test]
    fn estimate_identical_vectors_is_outer_product() {
        let z = vec![1.5, -0.5];
        let vectors = Matrix::from_rows(&[z.clone(), z.clone(), z.clone()]).unwrap();
        let batch = SampleBatch::from_vectors(vectors, 0).unwrap();
        let est = estimate(&batch);
        assert_eq!(est.e_hat().at(0, 0), 2.25);
        assert_eq!(est.e_hat().at(0, 1), -0.75);
        assert_eq!(est.e_hat().at(1, 1), 0.25);
    }

    #[test]
    fn estimate_two_basis_vectors() {
        let vectors = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let batch = SampleBatch::from_vectors(vectors, 0).unwrap();
        let est = estimate(&batch);
        assert_eq!(est.e_hat().at(0, 0), 0.5);
        assert_eq!(est.e_hat().at(1, 1), 0.5);
        assert_eq!(est.e_hat().at(0, 1), 0.0);
    }

    #[test]
    fn linear_estimator_has_zero_error() {
        let f = SampledFunction::linear(vec![1.0, 1.0]).unwrap();
        let batch = draw_batch(&f, 16, 5).unwrap();
        let est = estimate(&batch).with_reference(f.analytic_e().unwrap()).unwrap();
        assert_eq!(est.rel_error(), Some(0.0));
    }

    #[test]
    fn ridge_single_direction_rank_one() {
        let d = vec![vec![1.0, 0.0, 0.0]];
        let f = SampledFunction::ridge_sum(d, vec![1.0]).unwrap();
        let e = f.analytic_e().unwrap();
        // sigma^2 = mean of cos^2(x_0) = (1 + sin(2)/2) / 2, in (0, 1).
        let sigma_sq = 0.5 * (1.0 + 0.5 * 2.0f64.sin());
        assert!((e.at(0, 0) - sigma_sq).abs() < 1e-10);
        for (i, j) in [(0, 1), (0, 2), (1, 1), (1, 2), (2, 2)] {
            assert!(e.at(i, j).abs() < 1e-14);
        }
    }

    #[test]
    fn ridge_zero_amplitude_drops_term() {
        let dirs = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let f = SampledFunction::ridge_sum(dirs, vec![1.0, 0.0]).unwrap();
        let eig = f.analytic_e().unwrap().eigh().unwrap();
        assert!(eig.values()[0] > 0.1);
        assert!(eig.values()[1].abs() < 1e-14);
    }

    #[test]
    fn ridge_rejects_non_orthonormal() {
        let dirs = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        assert!(SampledFunction::ridge_sum(dirs, vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn batch_csv_has_one_row_per_sample() {
        let f = SampledFunction::linear(vec![1.0, 2.0]).unwrap();
        let batch = draw_batch(&f, 3, 1).unwrap();
        let mut buf = Vec::new();
        batch.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with('#'));
        assert_eq!(lines[1], "1,2");
    }

    #[test]
    fn zero_padding_preserves_analytic_quantities() {
        let f = SampledFunction::quadratic(SymmetricMatrix::diagonal(&[2.0, 1.0]).unwrap()).unwrap();
        let g = f.zero_pad(6).unwrap();
        assert_eq!(g.dim(), 6);
        assert_eq!(g.lipschitz_l, f.lipschitz_l);
        assert_eq!(
            g.analytic_e().unwrap().spectral_norm(),
            f.analytic_e().unwrap().spectral_norm()
        );
    }
}
