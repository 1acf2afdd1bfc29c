//! Repeated-trial experiment driver.
//!
//! Measures how often the certified bounds are actually exceeded on
//! builtin functions, how much slack they carry, and how the planner
//! compares against the dimension-dependent prior expression. Trials are
//! independent jobs with pre-assigned seeds, run through [`crate::exec`]
//! (data-parallel when the `parallel` feature is on); the reduction into
//! a report is sequential in trial order, so reports are byte-identical
//! for a given config and master seed.

mod config;
mod report;

pub use config::{ExperimentConfig, ExperimentKind, FunctionSpec, SampleSpec};
pub use report::{
    AngleStats, ComparisonRow, CoverageRow, ExperimentReport, FunctionSummary, ReportBody,
    TightnessRow,
};

use crate::bounds::{
    angle_certificate, expectation_markov_bound, prior_work_samples, relative_error_bound,
    required_samples, estimate_nu, GapInfo, PlannerParams,
};
use crate::error::{Error, Result};
use crate::exec::run_indexed;
use crate::matrix::SymmetricMatrix;
use crate::rng::{derive_seed, fnv1a64};
use crate::sampling::{draw_batch, estimate, SampledFunction};
use crate::stats::{clopper_pearson, mean_std, quantile_nearest_rank};
use crate::subspace::{principal_angle_sin, SubspaceBasis};

/// Seed domain reserved for the variance-parameter estimate of the
/// comparison experiment; sweep points use their index as domain.
const NU_SEED_DOMAIN: u64 = u64::MAX;

/// Confidence level for all binomial intervals in reports.
const CONFIDENCE: f64 = 0.95;

/// Validate, resolve the seed, and dispatch to the right runner.
pub fn run_experiment(cfg: &ExperimentConfig, override_seed: Option<u64>) -> Result<ExperimentReport> {
    cfg.validate()?;
    let master_seed = cfg.resolve_seed(override_seed)?;
    match cfg.experiment {
        ExperimentKind::Coverage => run_coverage(cfg, master_seed),
        ExperimentKind::Tightness => run_tightness_sweep(cfg, master_seed),
        ExperimentKind::Comparison => run_comparison(cfg, master_seed),
    }
}

struct Resolved {
    function: SampledFunction,
    analytic_e: SymmetricMatrix,
    norm_e: f64,
    planner: PlannerParams,
    summary: FunctionSummary,
    fingerprint: String,
}

fn resolve(cfg: &ExperimentConfig) -> Result<Resolved> {
    let function = cfg.function.build()?;
    let analytic_e = function
        .analytic_e()
        .ok_or_else(|| Error::Domain("experiments need a function with a known moment matrix".into()))?
        .clone();
    let eig = analytic_e.eigh()?;
    let norm_e = eig.spectral_norm();
    let planner = PlannerParams::from_function(&function, cfg.epsilon, cfg.delta)?;
    let gap_at_k = match cfg.k {
        Some(k) => Some(eig.gap_at(k)?),
        None => None,
    };
    let summary = FunctionSummary {
        kind: function.kind().name().to_string(),
        dim: function.dim(),
        lipschitz_l: function.lipschitz_l,
        norm_e,
        intdim_e: planner.intdim_e,
        smoothness_ratio: planner.smoothness_ratio(),
        eigenvalues: eig.values().to_vec(),
        gap_at_k,
    };
    let canonical = serde_json::to_string(cfg).expect("config is serializable");
    let fingerprint = format!("{:016x}", fnv1a64(canonical.as_bytes()));
    Ok(Resolved {
        function,
        analytic_e,
        norm_e,
        planner,
        summary,
        fingerprint,
    })
}

fn sample_counts(cfg: &ExperimentConfig, planner: &PlannerParams) -> Result<(Vec<u64>, bool)> {
    match cfg.samples.as_ref() {
        Some(SampleSpec::Counts(counts)) => Ok((counts.clone(), false)),
        Some(SampleSpec::Mode(_)) => Ok((vec![required_samples(planner)?], true)),
        None => Err(Error::Config("samples: required".into())),
    }
}

struct TrialOutcome {
    rel_err: f64,
    /// None when the perturbed dominant subspace was unresolvable.
    sin_angle: Option<f64>,
}

fn run_trials(
    f: &SampledFunction,
    analytic_e: &SymmetricMatrix,
    norm_e: f64,
    basis: Option<(&SubspaceBasis, usize)>,
    n: u64,
    trials: usize,
    master_seed: u64,
    domain: u64,
) -> Result<Vec<TrialOutcome>> {
    let outcomes: Vec<Result<TrialOutcome>> = run_indexed(trials, |t| {
        let seed = derive_seed(master_seed, domain, t as u64);
        let batch = draw_batch(f, n as usize, seed)?;
        let est = estimate(&batch);
        let rel_err = est.e_hat().sub(analytic_e)?.spectral_norm() / norm_e;
        let sin_angle = match basis {
            None => None,
            Some((v1, k)) => {
                let eig_hat = est.e_hat().eigh()?;
                let perturbed_gap = eig_hat.gap_at(k)?;
                let resolvable =
                    perturbed_gap > crate::perturbation::GAP_RESOLUTION * eig_hat.spectral_norm();
                if resolvable {
                    let v1_hat = SubspaceBasis::from_leading(&eig_hat, k)?;
                    Some(principal_angle_sin(v1, &v1_hat)?)
                } else {
                    None
                }
            }
        };
        Ok(TrialOutcome { rel_err, sin_angle })
    });
    outcomes.into_iter().collect()
}

/// Coverage experiment: empirical frequency of `rel_err > ε` per sample
/// count, against the certified failure probability δ; with `k` set, the
/// subspace angle is tracked against its certified bound as well.
pub fn run_coverage(cfg: &ExperimentConfig, master_seed: u64) -> Result<ExperimentReport> {
    let r = resolve(cfg)?;
    let (counts, plan_mode) = sample_counts(cfg, &r.planner)?;
    let mut notes = Vec::new();

    let eig_e = r.analytic_e.eigh()?;
    let angle_setup = match cfg.k {
        Some(k) => {
            let gap = eig_e.gap_at(k)?;
            if gap <= crate::perturbation::GAP_RESOLUTION * r.norm_e {
                return Err(Error::Domain(format!(
                    "dominant subspace undefined: no resolvable gap at k={k}"
                )));
            }
            let basis = SubspaceBasis::from_leading(&eig_e, k)?;
            let bound = 4.0 * r.norm_e * cfg.epsilon / gap;
            let threshold = gap / (4.0 * r.norm_e);
            let ok = cfg.epsilon < threshold;
            if !ok {
                notes.push(format!(
                    "angle certificate hypothesis fails: epsilon {} is not below the gap threshold {threshold}",
                    cfg.epsilon
                ));
            }
            Some((basis, k, bound, ok))
        }
        None => None,
    };

    let trials = cfg.trials;
    let mut rows = Vec::with_capacity(counts.len());
    let mut soundness_ok = true;

    for (idx, &n) in counts.iter().enumerate() {
        let basis_ref = angle_setup.as_ref().map(|(b, k, _, _)| (b, *k));
        let outcomes = run_trials(
            &r.function,
            &r.analytic_e,
            r.norm_e,
            basis_ref,
            n,
            trials,
            master_seed,
            idx as u64,
        )?;

        let rel_errs: Vec<f64> = outcomes.iter().map(|o| o.rel_err).collect();
        let exceed_count = rel_errs.iter().filter(|&&e| e > cfg.epsilon).count() as u64;
        let (ci_low, ci_high) = clopper_pearson(exceed_count, trials as u64, CONFIDENCE);
        let predicted = relative_error_bound(&r.planner.with_n(n))?.value;
        let (mean_rel, _) = mean_std(&rel_errs);

        let angle = angle_setup.as_ref().map(|(_, _, bound, bound_ok)| {
            let mut exceed = 0u64;
            let mut ill_defined = 0u64;
            let mut ill_defined_among_ok = 0u64;
            let mut sins = Vec::new();
            for o in &outcomes {
                match o.sin_angle {
                    Some(s) => {
                        sins.push(s);
                        if s > *bound {
                            exceed += 1;
                        }
                    }
                    None => {
                        exceed += 1;
                        ill_defined += 1;
                        if o.rel_err <= cfg.epsilon {
                            ill_defined_among_ok += 1;
                        }
                    }
                }
            }
            let (a_low, a_high) = clopper_pearson(exceed, trials as u64, CONFIDENCE);
            let (mean_sin, _) = if sins.is_empty() {
                (0.0, 0.0)
            } else {
                mean_std(&sins)
            };
            AngleStats {
                bound: *bound,
                bound_assumptions_ok: *bound_ok,
                exceed_count: exceed,
                exceed_ci_low: a_low,
                exceed_ci_high: a_high,
                ill_defined_count: ill_defined,
                ill_defined_among_ok,
                mean_sin,
                max_sin: sins.iter().fold(0.0f64, |m, &s| m.max(s)),
            }
        });

        if plan_mode {
            if ci_low > cfg.delta {
                soundness_ok = false;
            }
            if let Some(a) = &angle {
                if a.bound_assumptions_ok && (a.exceed_ci_low > cfg.delta || a.ill_defined_among_ok > 0) {
                    soundness_ok = false;
                }
            }
        }

        rows.push(CoverageRow {
            n,
            trials: trials as u64,
            exceed_count,
            exceed_rate: exceed_count as f64 / trials as f64,
            exceed_ci_low: ci_low,
            exceed_ci_high: ci_high,
            predicted_epsilon: predicted,
            mean_rel_err: mean_rel,
            median_rel_err: quantile_nearest_rank(&rel_errs, 0.5),
            quantile_rel_err: quantile_nearest_rank(&rel_errs, 1.0 - cfg.delta),
            max_rel_err: rel_errs.iter().fold(0.0f64, |m, &e| m.max(e)),
            angle,
        });
    }

    Ok(ExperimentReport {
        experiment: ExperimentKind::Coverage.name().to_string(),
        config_fingerprint: r.fingerprint,
        master_seed,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        k: cfg.k,
        function: r.summary,
        body: ReportBody::Coverage { rows },
        soundness_ok,
        notes,
    })
}

/// Tightness sweep: certified bounds vs the observed (1−δ)-quantile of
/// the relative error, per sample count.
pub fn run_tightness_sweep(cfg: &ExperimentConfig, master_seed: u64) -> Result<ExperimentReport> {
    let r = resolve(cfg)?;
    let (counts, _) = sample_counts(cfg, &r.planner)?;
    let mut rows = Vec::with_capacity(counts.len());
    let mut soundness_ok = true;

    for (idx, &n) in counts.iter().enumerate() {
        let outcomes = run_trials(
            &r.function,
            &r.analytic_e,
            r.norm_e,
            None,
            n,
            cfg.trials,
            master_seed,
            idx as u64,
        )?;
        let rel_errs: Vec<f64> = outcomes.iter().map(|o| o.rel_err).collect();
        let params = r.planner.with_n(n);
        let predicted_bernstein = relative_error_bound(&params)?.value;
        let predicted_markov_rel = expectation_markov_bound(&params)?.value / r.norm_e;
        let observed = quantile_nearest_rank(&rel_errs, 1.0 - cfg.delta);
        if predicted_bernstein < observed {
            soundness_ok = false;
        }
        let (mean_rel, _) = mean_std(&rel_errs);
        rows.push(TightnessRow {
            n,
            predicted_bernstein,
            predicted_markov_rel,
            observed_quantile: observed,
            slack_bernstein: if observed > 0.0 {
                predicted_bernstein / observed
            } else {
                f64::MAX
            },
            slack_markov: if observed > 0.0 {
                predicted_markov_rel / observed
            } else {
                f64::MAX
            },
            mean_rel_err: mean_rel,
        });
    }

    Ok(ExperimentReport {
        experiment: ExperimentKind::Tightness.name().to_string(),
        config_fingerprint: r.fingerprint,
        master_seed,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        k: cfg.k,
        function: r.summary,
        body: ReportBody::Tightness { rows },
        soundness_ok,
        notes: Vec::new(),
    })
}

/// Comparison sweep: the dimension-free planner vs the ln(2m) prior
/// expression on zero-padded embeddings of the same function. The
/// variance parameter is estimated once on the base function — inactive
/// coordinates leave its true value unchanged — so the only moving part
/// across rows is the ambient dimension.
pub fn run_comparison(cfg: &ExperimentConfig, master_seed: u64) -> Result<ExperimentReport> {
    let r = resolve(cfg)?;
    let dims = cfg.dims.clone().expect("validated");
    let n_ref = cfg.nu_ref_samples.unwrap_or(100_000);
    let nu_seed = derive_seed(master_seed, NU_SEED_DOMAIN, 0);
    let nu = estimate_nu(&r.function, n_ref, nu_seed)?;

    let mut rows = Vec::with_capacity(dims.len());
    for &m in &dims {
        let padded = r.function.zero_pad(m)?;
        let planner = PlannerParams::from_function(&padded, cfg.epsilon, cfg.delta)?;
        let planner_n = required_samples(&planner)?;
        let prior = prior_work_samples(planner.norm_e, nu, padded.lipschitz_l, cfg.epsilon, m)?;
        rows.push(ComparisonRow {
            m,
            planner_n,
            prior_work_value: prior.value,
            prior_work_max_branch: prior.intermediate("max_branch").expect("recorded"),
            prior_work_log_factor: prior.intermediate("log_factor").expect("recorded"),
            ratio: prior.value / planner_n as f64,
        });
    }
    let soundness_ok = rows.windows(2).all(|w| w[0].planner_n == w[1].planner_n);

    Ok(ExperimentReport {
        experiment: ExperimentKind::Comparison.name().to_string(),
        config_fingerprint: r.fingerprint,
        master_seed,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        k: cfg.k,
        function: r.summary,
        body: ReportBody::Comparison {
            rows,
            nu_estimate: nu,
            nu_seed,
            nu_ref_samples: n_ref,
        },
        soundness_ok,
        notes: vec![
            "variance parameter estimated on the base function; zero-padding leaves it unchanged".into(),
            "prior-work expression carries an unspecified constant and failure probability".into(),
        ],
    })
}

/// Analytic summary used by the `info` command: built once here so the
/// CLI prints exactly what the library computes.
pub fn function_summary(spec: &FunctionSpec, k: Option<usize>) -> Result<FunctionSummary> {
    let function = spec.build()?;
    let e = function
        .analytic_e()
        .ok_or_else(|| Error::Domain("function has no analytic moment matrix".into()))?;
    let eig = e.eigh()?;
    let norm_e = eig.spectral_norm();
    let intdim = e.intrinsic_dimension()?;
    let gap_at_k = match k {
        Some(k) => Some(eig.gap_at(k)?),
        None => None,
    };
    Ok(FunctionSummary {
        kind: function.kind().name().to_string(),
        dim: function.dim(),
        lipschitz_l: function.lipschitz_l,
        norm_e,
        intdim_e: intdim,
        smoothness_ratio: function.lipschitz_l * function.lipschitz_l / norm_e,
        eigenvalues: eig.values().to_vec(),
        gap_at_k,
    })
}

/// Evaluate the angle certificate for a configured function, for the
/// `plan` command's gap-threshold check.
pub fn angle_certificate_for(
    spec: &FunctionSpec,
    k: usize,
    epsilon: f64,
    delta: f64,
) -> Result<crate::bounds::BoundCertificate> {
    let function = spec.build()?;
    let e = function
        .analytic_e()
        .ok_or_else(|| Error::Domain("function has no analytic moment matrix".into()))?;
    let planner = PlannerParams::from_function(&function, epsilon, delta)?;
    let gap = GapInfo::from_matrix(e, k)?;
    let n = required_samples(&planner)?;
    angle_certificate(&planner.with_n(n), &gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coverage_cfg(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    #[test]
    fn linear_coverage_has_zero_exceedance() {
        let cfg = coverage_cfg(
            r#"{
            "experiment": "coverage",
            "function": {"kind": "linear", "coefficients": [1.0, 2.0]},
            "trials": 20,
            "samples": [3, 7],
            "epsilon": 0.5,
            "delta": 0.1,
            "master_seed": 1
        }"#,
        );
        let report = run_experiment(&cfg, None).unwrap();
        match &report.body {
            ReportBody::Coverage { rows } => {
                assert_eq!(rows.len(), 2);
                for row in rows {
                    assert_eq!(row.exceed_count, 0);
                    assert_eq!(row.max_rel_err, 0.0);
                }
            }
            _ => panic!("wrong body"),
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = coverage_cfg(
            r#"{
            "experiment": "coverage",
            "function": {"kind": "quadratic", "matrix": [[2.0, 0.0], [0.0, 1.0]]},
            "trials": 25,
            "samples": "plan",
            "epsilon": 0.5,
            "delta": 0.1,
            "k": 1,
            "master_seed": 11
        }"#,
        );
        let a = run_experiment(&cfg, None).unwrap();
        let b = run_experiment(&cfg, None).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn interval_width_shrinks_with_more_trials() {
        let base = r#"{
            "experiment": "coverage",
            "function": {"kind": "quadratic", "matrix": [[2.0, 0.0], [0.0, 1.0]]},
            "trials": 50,
            "samples": [20],
            "epsilon": 0.5,
            "delta": 0.1,
            "master_seed": 3
        }"#;
        let narrow = run_experiment(&coverage_cfg(base), None).unwrap();
        let wide = run_experiment(
            &coverage_cfg(&base.replace("\"trials\": 50", "\"trials\": 200")),
            None,
        )
        .unwrap();
        let width = |r: &ExperimentReport| match &r.body {
            ReportBody::Coverage { rows } => rows[0].exceed_ci_high - rows[0].exceed_ci_low,
            _ => unreachable!(),
        };
        assert!(width(&wide) < width(&narrow));
    }

    #[test]
    fn comparison_planner_is_dimension_free() {
        let cfg = coverage_cfg(
            r#"{
            "experiment": "comparison",
            "function": {"kind": "quadratic", "matrix": [[2.0, 0.0], [0.0, 1.0]]},
            "trials": 1,
            "epsilon": 0.1,
            "delta": 0.1,
            "dims": [2, 4, 8],
            "nu_ref_samples": 200,
            "master_seed": 5
        }"#,
        );
        let report = run_experiment(&cfg, None).unwrap();
        assert!(report.soundness_ok);
        match &report.body {
            ReportBody::Comparison { rows, .. } => {
                assert_eq!(rows[0].planner_n, rows[1].planner_n);
                assert_eq!(rows[1].planner_n, rows[2].planner_n);
                assert!(rows[2].prior_work_value > rows[0].prior_work_value);
            }
            _ => panic!("wrong body"),
        }
    }

    #[test]
    fn tightness_bound_dominates_observation() {
        let cfg = coverage_cfg(
            r#"{
            "experiment": "tightness",
            "function": {"kind": "quadratic", "matrix": [[2.0, 0.5], [0.5, 1.0]]},
            "trials": 60,
            "samples": [50, 200],
            "epsilon": 0.5,
            "delta": 0.1,
            "master_seed": 17
        }"#,
        );
        let report = run_experiment(&cfg, None).unwrap();
        assert!(report.soundness_ok);
        match &report.body {
            ReportBody::Tightness { rows } => {
                for row in rows {
                    assert!(row.predicted_bernstein >= row.observed_quantile);
                    assert!(row.slack_bernstein >= 1.0);
                }
            }
            _ => panic!("wrong body"),
        }
    }
}
