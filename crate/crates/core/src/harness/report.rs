//! Experiment reports and their CSV/JSON serialization.
//!
//! Output is fully deterministic: floats print in Rust's shortest
//! round-trip form, rows follow sweep order, and JSON field order is the
//! struct declaration order. Identical config + master seed therefore
//! reproduce byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// Analytic summary of the function under test.
#[derive(Debug, Clone, Serialize)]
pub struct FunctionSummary {
    pub kind: String,
    pub dim: usize,
    pub lipschitz_l: f64,
    pub norm_e: f64,
    pub intdim_e: f64,
    pub smoothness_ratio: f64,
    pub eigenvalues: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_at_k: Option<f64>,
}

/// Angle-tracking statistics for one sample count.
#[derive(Debug, Clone, Serialize)]
pub struct AngleStats {
    /// Certified sine bound 4‖E‖₂ε/gap.
    pub bound: f64,
    /// Whether ε is below the gap threshold the bound requires.
    pub bound_assumptions_ok: bool,
    /// Trials where the perturbed dominant subspace was unresolvable or
    /// its angle exceeded the bound.
    pub exceed_count: u64,
    pub exceed_ci_low: f64,
    pub exceed_ci_high: f64,
    pub ill_defined_count: u64,
    /// Unresolvable subspaces among trials whose relative error was
    /// within tolerance (the well-definedness guarantee says zero).
    pub ill_defined_among_ok: u64,
    pub mean_sin: f64,
    pub max_sin: f64,
}

/// One sweep point of a coverage experiment.
#[derive(Debug, Clone, Serialize)]
pub struct CoverageRow {
    pub n: u64,
    pub trials: u64,
    pub exceed_count: u64,
    pub exceed_rate: f64,
    pub exceed_ci_low: f64,
    pub exceed_ci_high: f64,
    /// Certified relative-error bound at this n.
    pub predicted_epsilon: f64,
    pub mean_rel_err: f64,
    pub median_rel_err: f64,
    /// Empirical (1−δ)-quantile of the relative error.
    pub quantile_rel_err: f64,
    pub max_rel_err: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angle: Option<AngleStats>,
}

/// One sweep point of a tightness experiment.
#[derive(Debug, Clone, Serialize)]
pub struct TightnessRow {
    pub n: u64,
    pub predicted_bernstein: f64,
    /// Expectation/Markov bound, divided by ‖E‖₂ for comparability.
    pub predicted_markov_rel: f64,
    pub observed_quantile: f64,
    pub slack_bernstein: f64,
    pub slack_markov: f64,
    pub mean_rel_err: f64,
}

/// One embedding of the comparison sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub m: usize,
    pub planner_n: u64,
    pub prior_work_value: f64,
    pub prior_work_max_branch: f64,
    pub prior_work_log_factor: f64,
    /// prior_work_value / planner_n.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReportBody {
    Coverage {
        rows: Vec<CoverageRow>,
    },
    Tightness {
        rows: Vec<TightnessRow>,
    },
    Comparison {
        rows: Vec<ComparisonRow>,
        nu_estimate: f64,
        nu_seed: u64,
        nu_ref_samples: usize,
    },
}

/// Complete result of one experiment run.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    /// FNV-1a fingerprint of the canonical config JSON.
    pub config_fingerprint: String,
    pub master_seed: u64,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub function: FunctionSummary,
    pub body: ReportBody,
    /// True iff every soundness assertion that applies to this run held.
    pub soundness_ok: bool,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    /// The per-sweep CSV, with columns documented in header comments.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# experiment: {}", self.experiment);
        let _ = writeln!(out, "# config_fingerprint: {}", self.config_fingerprint);
        let _ = writeln!(out, "# master_seed: {}", self.master_seed);
        match &self.body {
            ReportBody::Coverage { rows } => {
                let has_angle = rows.iter().any(|r| r.angle.is_some());
                let _ = writeln!(out, "# n: sample count per trial");
                let _ = writeln!(out, "# exceed_*: trials with rel_err > epsilon; ci at 95% (Clopper-Pearson)");
                let _ = writeln!(out, "# predicted_epsilon: certified relative-error bound at n");
                let _ = writeln!(out, "# quantile_rel_err: empirical (1-delta) quantile");
                if has_angle {
                    let _ = writeln!(out, "# angle_exceed counts sin > bound or an unresolvable subspace");
                }
                let mut header = "n,trials,exceed_count,exceed_rate,exceed_ci_low,exceed_ci_high,predicted_epsilon,mean_rel_err,median_rel_err,quantile_rel_err,max_rel_err".to_string();
                if has_angle {
                    header.push_str(",angle_bound,angle_bound_ok,angle_exceed_count,angle_exceed_ci_low,angle_exceed_ci_high,ill_defined_count,ill_defined_among_ok,mean_sin,max_sin");
                }
                let _ = writeln!(out, "{header}");
                for r in rows {
                    let mut line = format!(
                        "{},{},{},{},{},{},{},{},{},{},{}",
                        r.n,
                        r.trials,
                        r.exceed_count,
                        r.exceed_rate,
                        r.exceed_ci_low,
                        r.exceed_ci_high,
                        r.predicted_epsilon,
                        r.mean_rel_err,
                        r.median_rel_err,
                        r.quantile_rel_err,
                        r.max_rel_err
                    );
                    if let Some(a) = &r.angle {
                        let _ = write!(
                            line,
                            ",{},{},{},{},{},{},{},{},{}",
                            a.bound,
                            a.bound_assumptions_ok,
                            a.exceed_count,
                            a.exceed_ci_low,
                            a.exceed_ci_high,
                            a.ill_defined_count,
                            a.ill_defined_among_ok,
                            a.mean_sin,
                            a.max_sin
                        );
                    } else if has_angle {
                        line.push_str(",,,,,,,,,");
                    }
                    let _ = writeln!(out, "{line}");
                }
            }
            ReportBody::Tightness { rows } => {
                let _ = writeln!(out, "# predicted_bernstein: certified relative-error bound at n");
                let _ = writeln!(out, "# predicted_markov_rel: expectation/Markov bound over norm_e");
                let _ = writeln!(out, "# observed_quantile: empirical (1-delta) quantile of rel_err");
                let _ = writeln!(out, "# slack_*: predicted / observed");
                let _ = writeln!(
                    out,
                    "n,predicted_bernstein,predicted_markov_rel,observed_quantile,slack_bernstein,slack_markov,mean_rel_err"
                );
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        r.n,
                        r.predicted_bernstein,
                        r.predicted_markov_rel,
                        r.observed_quantile,
                        r.slack_bernstein,
                        r.slack_markov,
                        r.mean_rel_err
                    );
                }
            }
            ReportBody::Comparison {
                rows,
                nu_estimate,
                nu_seed,
                nu_ref_samples,
            } => {
                let _ = writeln!(out, "# nu_estimate: {nu_estimate} (seed {nu_seed}, {nu_ref_samples} samples)");
                let _ = writeln!(out, "# planner_n: dimension-free certified sample count");
                let _ = writeln!(out, "# prior_work_value: ln(2m)-scaled expression, implied constant 1");
                let _ = writeln!(
                    out,
                    "m,planner_n,prior_work_value,prior_work_max_branch,prior_work_log_factor,ratio"
                );
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        r.m,
                        r.planner_n,
                        r.prior_work_value,
                        r.prior_work_max_branch,
                        r.prior_work_log_factor,
                        r.ratio
                    );
                }
            }
        }
        out
    }

    /// Write `<prefix>_<experiment>.csv` and `<prefix>_summary.json` into
    /// `dir`; returns the paths written.
    pub fn write_files(&self, dir: &Path, prefix: &str) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{prefix}_{}.csv", self.experiment));
        let json_path = dir.join(format!("{prefix}_summary.json"));
        std::fs::write(&csv_path, self.to_csv())?;
        std::fs::write(&json_path, self.to_json())?;
        Ok(vec![csv_path, json_path])
    }
}
