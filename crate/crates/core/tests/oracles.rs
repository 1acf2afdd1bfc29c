//! Oracle-based checks: every value the library computes along one route
//! is re-derived here along an independent route (power iteration,
//! closed-form integrals, larger-sample reference runs) and compared at
//! the stated tolerance.

use actsub_core::bounds::{bernstein_tail, estimate_nu, relative_error_bound, ProblemParams};
use actsub_core::instances::{haar_orthogonal, matrix_with_spectrum};
use actsub_core::rng::{rng_from_seed, unit_uniform};
use actsub_core::sampling::{draw_batch, SampledFunction};
use actsub_core::stats::mean_std;
use actsub_core::{Matrix, SubspaceBasis, SymmetricMatrix};

/// Largest |eigenvalue| by power iteration on A² (handles the dominant
/// eigenvalue being negative), independent of the Jacobi path.
fn power_iteration_abs_norm(a: &SymmetricMatrix, seed: u64) -> f64 {
    let m = a.dim();
    let sq = a.to_matrix().matmul(&a.to_matrix());
    let mut rng = rng_from_seed(seed);
    let mut v: Vec<f64> = (0..m).map(|_| unit_uniform(&mut rng) + 0.5).collect();
    let mut rayleigh = 0.0f64;
    for _ in 0..100_000 {
        let w = sq.matvec(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let new_rayleigh: f64 = next
            .iter()
            .zip(sq.matvec(&next))
            .map(|(x, y)| x * y)
            .sum();
        let done = (new_rayleigh - rayleigh).abs() <= 1e-12 * new_rayleigh.abs().max(1.0);
        rayleigh = new_rayleigh;
        v = next;
        if done {
            break;
        }
    }
    rayleigh.max(0.0).sqrt()
}

fn random_symmetric(m: usize, rng: &mut actsub_core::rng::Rng) -> SymmetricMatrix {
    let g = Matrix::from_fn(m, m, |_, _| 2.0 * unit_uniform(rng) - 1.0);
    SymmetricMatrix::new(m, g.data().to_vec()).unwrap()
}

#[test]
fn spectral_norm_matches_power_iteration() {
    let mut rng = rng_from_seed(101);
    for t in 0..50 {
        let m = 2 + (t % 9);
        let a = random_symmetric(m, &mut rng);
        let via_eig = a.spectral_norm();
        let via_power = power_iteration_abs_norm(&a, 1000 + t as u64);
        assert!(
            (via_eig - via_power).abs() <= 1e-8 * via_eig.max(1.0),
            "m={m}: eig {via_eig} vs power {via_power}"
        );
    }
}

#[test]
fn eig_reconstructs_random_5x5() {
    let mut rng = rng_from_seed(102);
    for _ in 0..50 {
        let a = random_symmetric(5, &mut rng);
        let eig = a.eigh().unwrap();
        let residual = eig.reconstruct().sub(&a).unwrap().frobenius_norm();
        assert!(residual <= 1e-8 * a.spectral_norm().max(f64::MIN_POSITIVE));
        eig.validate(&a).unwrap();
    }
}

#[test]
fn intdim_equals_stable_rank_of_square_root() {
    let mut rng = rng_from_seed(103);
    for t in 0..50 {
        let m = 2 + (t % 11);
        let spectrum: Vec<f64> = (0..m).map(|_| unit_uniform(&mut rng) + 1e-3).collect();
        let a = matrix_with_spectrum(&spectrum, &mut rng).with_psd_hint();
        let intdim = a.intrinsic_dimension().unwrap();

        // Square root through the eigensystem, then the stable rank
        // (Frobenius over spectral, squared) of that explicit matrix.
        let eig = a.eigh().unwrap();
        let m_ = a.dim();
        let mut root = vec![0.0; m_ * m_];
        for i in 0..m_ {
            for j in 0..m_ {
                let mut s = 0.0;
                for (l, lam) in eig.values().iter().enumerate() {
                    s += eig.vectors()[(i, l)] * lam.max(0.0).sqrt() * eig.vectors()[(j, l)];
                }
                root[i * m_ + j] = s;
            }
        }
        let root = SymmetricMatrix::new(m_, root).unwrap();
        let stable_rank = {
            let f = root.frobenius_norm();
            let s = root.spectral_norm();
            (f / s) * (f / s)
        };
        assert!(
            (intdim - stable_rank).abs() <= 1e-10,
            "m={m}: intdim {intdim} vs stable rank {stable_rank}"
        );
    }
}

#[test]
fn projector_trace_equals_subspace_dimension() {
    let mut rng = rng_from_seed(104);
    for t in 0..30 {
        let m = 3 + (t % 8);
        let k = 1 + (t % (m - 1));
        let q = haar_orthogonal(m, &mut rng);
        let basis = SubspaceBasis::new(Matrix::from_fn(m, k, |i, j| q[(i, j)])).unwrap();
        let p = basis.projector();
        assert!((p.trace() - k as f64).abs() <= 1e-10);
    }
}

/// Closed-form route for the ridge-sum moments: the cosine mean over the
/// hypercube factors into sin(w)/w terms. The library route goes through
/// composite quadrature; the two must agree to 1e-10.
fn sinc(w: f64) -> f64 {
    if w == 0.0 {
        1.0
    } else {
        w.sin() / w
    }
}

fn ridge_moment_oracle(directions: &[Vec<f64>], amplitudes: &[f64]) -> Matrix {
    let m = directions[0].len();
    let p = directions.len();
    let mut e = Matrix::zeros(m, m);
    for i in 0..p {
        for j in 0..p {
            let mut prod_minus = 1.0;
            let mut prod_plus = 1.0;
            for l in 0..m {
                prod_minus *= sinc(directions[i][l] - directions[j][l]);
                prod_plus *= sinc(directions[i][l] + directions[j][l]);
            }
            let c = 0.5 * (prod_minus + prod_plus) * amplitudes[i] * amplitudes[j];
            for r in 0..m {
                for s in 0..m {
                    e[(r, s)] += c * directions[i][r] * directions[j][s];
                }
            }
        }
    }
    e
}

#[test]
fn ridge_moment_matrix_matches_closed_form() {
    let mut rng = rng_from_seed(105);
    let m = 5;
    let q = haar_orthogonal(m, &mut rng);
    let directions: Vec<Vec<f64>> = (0..3).map(|j| q.column(j)).collect();
    let amplitudes = vec![1.25, -0.5, 0.75];
    let f = SampledFunction::ridge_sum(directions.clone(), amplitudes.clone()).unwrap();
    let oracle = ridge_moment_oracle(&directions, &amplitudes);
    let got = f.analytic_e().unwrap();
    for i in 0..m {
        for j in 0..m {
            assert!(
                (got.at(i, j) - oracle[(i, j)]).abs() <= 1e-10,
                "entry ({i},{j}): {} vs {}",
                got.at(i, j),
                oracle[(i, j)]
            );
        }
    }
}

#[test]
fn ridge_eigenvalue_gap_matches_oracle() {
    // Two orthonormal directions with different coordinate patterns give
    // two distinct nonzero eigenvalues; their gap must match the
    // closed-form 2x2 reduction.
    let s = 0.5f64.sqrt();
    let directions = vec![vec![1.0, 0.0, 0.0], vec![0.0, s, s]];
    let amplitudes = vec![1.0, 1.0];
    let f = SampledFunction::ridge_sum(directions.clone(), amplitudes.clone()).unwrap();
    let eig = f.analytic_e().unwrap().eigh().unwrap();

    // In the direction basis E reduces to diag-free 2x2 with entries
    // c11, c22, c12 from the sinc products.
    let c11 = 0.5 * (1.0 + sinc(2.0));
    let c22 = 0.5 * (1.0 + sinc(2.0 * s) * sinc(2.0 * s));
    let c12 = 0.5 * (sinc(1.0) * sinc(s) * sinc(-s) + sinc(1.0) * sinc(s) * sinc(s));
    let mid = 0.5 * (c11 + c22);
    let half_gap = (0.25 * (c11 - c22) * (c11 - c22) + c12 * c12).sqrt();
    let expected = [mid + half_gap, mid - half_gap];

    assert!((eig.values()[0] - expected[0]).abs() <= 1e-8);
    assert!((eig.values()[1] - expected[1]).abs() <= 1e-8);
    assert!(eig.values()[2].abs() <= 1e-12);
    let gap_got = eig.values()[0] - eig.values()[1];
    assert!((gap_got - 2.0 * half_gap).abs() <= 1e-8);
}

#[test]
fn batch_mean_matches_large_sample_reference() {
    let a = SymmetricMatrix::diagonal(&[2.0, 1.0, 0.5, 0.25]).unwrap();
    let f = SampledFunction::quadratic(a).unwrap();

    let mean_norm = |seed: u64, n: usize| {
        let batch = draw_batch(&f, n, seed).unwrap();
        let norms: Vec<f64> = (0..n)
            .map(|j| batch.vector(j).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        mean_std(&norms)
    };

    let (sample_mean, sample_std) = mean_norm(7, 10_000);
    let (reference_mean, _) = mean_norm(8, 1_000_000);
    let se = sample_std / (10_000f64).sqrt();
    assert!(
        (sample_mean - reference_mean).abs() <= 3.0 * se,
        "mean {sample_mean} vs reference {reference_mean} (se {se})"
    );
}

#[test]
fn nu_estimate_matches_large_sample_reference() {
    let a = SymmetricMatrix::diagonal(&[1.5, 0.75]).unwrap();
    let f = SampledFunction::quadratic(a).unwrap();
    let e = f.analytic_e().unwrap().clone();

    let nu_small = estimate_nu(&f, 100_000, 21).unwrap();
    let nu_big = estimate_nu(&f, 1_000_000, 22).unwrap();

    // Standard error of the small-sample estimate along the dominant
    // direction of the big-sample mean matrix (eigenvector wiggle is
    // second order). The sample path of estimate_nu is point-then-
    // gradient per draw, identical to draw_batch on the same seed.
    let big_mean = {
        let m = 2;
        let batch = draw_batch(&f, 1_000_000, 22).unwrap();
        let mut acc = vec![0.0; m * m];
        for t in 0..batch.len() {
            let z = batch.vector(t);
            let b: Vec<f64> = (0..m * m)
                .map(|idx| z[idx / m] * z[idx % m] - e.at(idx / m, idx % m))
                .collect();
            for i in 0..m {
                for j in 0..m {
                    let mut s = 0.0;
                    for l in 0..m {
                        s += b[i * m + l] * b[l * m + j];
                    }
                    acc[i * m + j] += s / 1_000_000.0;
                }
            }
        }
        SymmetricMatrix::new(m, acc).unwrap()
    };
    let top = big_mean.eigh().unwrap().leading_vectors(1).column(0);

    let batch = draw_batch(&f, 100_000, 21).unwrap();
    let scalars: Vec<f64> = (0..batch.len())
        .map(|t| {
            let z = batch.vector(t);
            let m = 2;
            let b: Vec<f64> = (0..m * m)
                .map(|idx| z[idx / m] * z[idx % m] - e.at(idx / m, idx % m))
                .collect();
            // u^T B^2 u = ||B u||^2 for symmetric B.
            let bu: Vec<f64> = (0..m)
                .map(|i| (0..m).map(|j| b[i * m + j] * top[j]).sum())
                .collect();
            bu.iter().map(|v| v * v).sum()
        })
        .collect();
    let (_, std) = mean_std(&scalars);
    let se = std / (scalars.len() as f64).sqrt();
    assert!(
        (nu_small - nu_big).abs() <= 3.0 * se,
        "nu {nu_small} vs reference {nu_big} (se {se})"
    );
}

#[test]
fn bernstein_round_trip_recovers_delta() {
    // The relative-error bound is defined as the epsilon at which the
    // tail evaluates to delta; check the inversion numerically.
    let p = ProblemParams {
        lipschitz_l: 1.7,
        norm_e: 1.3,
        intdim_e: 6.5,
        n: 500,
        delta: 0.02,
        epsilon: 0.5,
    };
    let cert = relative_error_bound(&p).unwrap();
    let eps_abs = cert.value * p.norm_e;
    let beta = p.lipschitz_l * p.lipschitz_l / p.n as f64;
    let tail = bernstein_tail(beta * p.norm_e, p.intdim_e, beta, eps_abs).unwrap();
    let raw = tail.intermediate("raw").unwrap();
    assert!(
        (raw - p.delta).abs() <= 1e-9 * p.delta,
        "tail {raw} vs delta {}",
        p.delta
    );
}
