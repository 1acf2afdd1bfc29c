//! Experiment configuration: JSON schema and validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;
use crate::sampling::SampledFunction;

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Empirical exceedance frequency of the relative-error certificate
    /// (and the angle certificate when `k` is set).
    Coverage,
    /// Predicted bounds vs the observed (1−δ)-quantile across n.
    Tightness,
    /// Planner vs the dimension-dependent prior expression, across
    /// zero-padded embeddings of one function.
    Comparison,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Coverage => "coverage",
            ExperimentKind::Tightness => "tightness",
            ExperimentKind::Comparison => "comparison",
        }
    }
}

/// Builtin function specification, as it appears in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Linear {
        coefficients: Vec<f64>,
    },
    Quadratic {
        matrix: Vec<Vec<f64>>,
    },
    RidgeSum {
        directions: Vec<Vec<f64>>,
        amplitudes: Vec<f64>,
    },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<SampledFunction> {
        match self {
            FunctionSpec::Linear { coefficients } => SampledFunction::linear(coefficients.clone()),
            FunctionSpec::Quadratic { matrix } => {
                SampledFunction::quadratic(SymmetricMatrix::from_rows(matrix)?)
            }
            FunctionSpec::RidgeSum {
                directions,
                amplitudes,
            } => SampledFunction::ridge_sum(directions.clone(), amplitudes.clone()),
        }
    }
}

/// Sample counts for the sweep: an explicit list, or `"plan"` to take the
/// single count returned by the sample-size planner.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleSpec {
    Counts(Vec<u64>),
    Mode(String),
}

impl SampleSpec {
    pub fn is_plan(&self) -> bool {
        matches!(self, SampleSpec::Mode(s) if s == "plan")
    }
}

/// Full experiment configuration. `master_seed` may be omitted in the
/// file only if a seed is supplied at invocation time; there is no hidden
/// entropy anywhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub function: FunctionSpec,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<SampleSpec>,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    /// Ambient dimensions for the comparison sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    /// Reference sample count for estimating the variance parameter in
    /// comparison mode (default 100_000).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_ref_samples: Option<usize>,
    /// Stem for output file names (default "experiment").
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_prefix: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials: must be >= 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!(
                "epsilon: must lie in (0,1), got {}",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!(
                "delta: must lie in (0,1), got {}",
                self.delta
            )));
        }
        match self.experiment {
            ExperimentKind::Coverage | ExperimentKind::Tightness => {
                match &self.samples {
                    None => {
                        return Err(Error::Config(
                            "samples: required (a list of counts, or \"plan\")".into(),
                        ))
                    }
                    Some(SampleSpec::Counts(counts)) => {
                        if counts.is_empty() {
                            return Err(Error::Config("samples: list must be non-empty".into()));
                        }
                        if counts.iter().any(|&n| n == 0) {
                            return Err(Error::Config("samples: every count must be >= 1".into()));
                        }
                    }
                    Some(SampleSpec::Mode(mode)) => {
                        if mode != "plan" {
                            return Err(Error::Config(format!(
                                "samples: unknown mode {mode:?}, expected \"plan\" or a list of counts"
                            )));
                        }
                    }
                }
            }
            ExperimentKind::Comparison => {
                let dims = self
                    .dims
                    .as_ref()
                    .ok_or_else(|| Error::Config("dims: required for comparison experiments".into()))?;
                if dims.is_empty() {
                    return Err(Error::Config("dims: list must be non-empty".into()));
                }
                if let Some(n_ref) = self.nu_ref_samples {
                    if n_ref == 0 {
                        return Err(Error::Config("nu_ref_samples: must be >= 1".into()));
                    }
                }
            }
        }
        if let Some(k) = self.k {
            if k == 0 {
                return Err(Error::Config("k: must be >= 1".into()));
            }
        }
        Ok(())
    }

    /// The master seed, from an invocation-time override or the config
    /// file; having neither is an error.
    pub fn resolve_seed(&self, override_seed: Option<u64>) -> Result<u64> {
        override_seed
            .or(self.master_seed)
            .ok_or_else(|| Error::Config("master seed required: set master_seed in the config or pass --seed".into()))
    }

    pub fn output_prefix(&self) -> &str {
        self.output_prefix.as_deref().unwrap_or("experiment")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const COVERAGE: &str = r#"{
        "experiment": "coverage",
        "function": {"kind": "linear", "coefficients": [1.0, 0.0]},
        "trials": 10,
        "samples": [5, 10],
        "epsilon": 0.5,
        "delta": 0.1,
        "master_seed": 7
    }"#;

    #[test]
    fn parses_coverage_config() {
        let cfg = ExperimentConfig::from_json(COVERAGE).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Coverage);
        assert_eq!(cfg.resolve_seed(None).unwrap(), 7);
        assert_eq!(cfg.resolve_seed(Some(9)).unwrap(), 9);
    }

    #[test]
    fn plan_mode_parses() {
        let text = COVERAGE.replace("[5, 10]", "\"plan\"");
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        assert!(cfg.samples.as_ref().unwrap().is_plan());
    }

    #[test]
    fn rejects_bad_fields() {
        for (from, to, needle) in [
            ("\"trials\": 10", "\"trials\": 0", "trials"),
            ("\"epsilon\": 0.5", "\"epsilon\": 1.5", "epsilon"),
            ("\"delta\": 0.1", "\"delta\": 0.0", "delta"),
            ("[5, 10]", "[]", "samples"),
            ("[5, 10]", "\"auto\"", "samples"),
        ] {
            let text = COVERAGE.replace(from, to);
            let err = ExperimentConfig::from_json(&text).unwrap_err();
            assert!(
                err.to_string().contains(needle),
                "expected {needle} in error {err}"
            );
        }
    }

    #[test]
    fn missing_seed_is_an_error() {
        let text = COVERAGE.replace(",\n        \"master_seed\": 7", "");
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        assert!(cfg.resolve_seed(None).is_err());
    }

    #[test]
    fn comparison_requires_dims() {
        let text = COVERAGE.replace("\"coverage\"", "\"comparison\"");
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("dims"));
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = COVERAGE.replace("\"trials\": 10", "\"trials\": 10, \"typo_field\": 1");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }
}
