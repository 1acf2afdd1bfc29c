//! `actsub` — certificates, sample planning, subspace verification, and
//! coverage experiments for Monte Carlo sensitivity-matrix estimation.
//!
//! Exit codes: 0 success, 2 usage/parse errors, 3 domain errors
//! (undefined quantities, unsupported sizes), 4 a stated hypothesis or
//! soundness check failed (diagnostics are still printed).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use actsub_core::bounds::{
    angle_certificate, bernstein_tail, expectation_markov_bound, prior_work_samples,
    relative_error_bound, required_samples, sample_size_certificate, BoundCertificate, GapInfo,
    PlannerParams, ProblemParams,
};
use actsub_core::harness::{
    angle_certificate_for, function_summary, run_experiment, ExperimentConfig, FunctionSpec,
};
use actsub_core::perturbation::theorem_t1_check;
use actsub_core::{Error, SymmetricMatrix};

mod output;

use output::{print_value, Format};

#[derive(Parser)]
#[command(name = "actsub", version, about = "Sensitivity-matrix estimation with explicit error certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan the sample count for a target relative error and failure
    /// probability; with --k, also check the subspace-angle hypothesis.
    Plan(PlanArgs),
    /// Evaluate one bound by name, exposing all intermediates.
    Certify(CertifyArgs),
    /// Check the deterministic subspace guarantee on two matrix files.
    Verify(VerifyArgs),
    /// Run a configured experiment and write CSV/JSON reports.
    Experiment(ExperimentArgs),
    /// Print the analytic quantities of a builtin function spec.
    Info(InfoArgs),
}

#[derive(Args)]
struct ProblemFlags {
    /// Uniform gradient bound L.
    #[arg(long)]
    lipschitz: Option<f64>,
    /// Spectral norm of the moment matrix E.
    #[arg(long = "norm-e")]
    norm_e: Option<f64>,
    /// Intrinsic dimension trace(E)/norm(E).
    #[arg(long)]
    intdim: Option<f64>,
    /// Builtin function spec: a JSON file path, or inline JSON starting
    /// with '{'. Supplies L, norm-e and intdim analytically.
    #[arg(long, conflicts_with_all = ["lipschitz", "norm_e", "intdim"])]
    function: Option<String>,
}

impl ProblemFlags {
    fn resolve(&self, epsilon: f64, delta: f64) -> Result<(PlannerParams, Option<FunctionSpec>), Error> {
        if let Some(spec_arg) = &self.function {
            let spec = load_function_spec(spec_arg)?;
            let f = spec.build()?;
            let params = PlannerParams::from_function(&f, epsilon, delta)?;
            return Ok((params, Some(spec)));
        }
        match (self.lipschitz, self.norm_e, self.intdim) {
            (Some(l), Some(norm_e), Some(intdim)) => {
                let params = PlannerParams {
                    lipschitz_l: l,
                    norm_e,
                    intdim_e: intdim,
                    delta,
                    epsilon,
                };
                params.validate()?;
                Ok((params, None))
            }
            _ => Err(Error::InvalidArgument(
                "supply either --function or all of --lipschitz, --norm-e, --intdim".into(),
            )),
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    #[command(flatten)]
    problem: ProblemFlags,
    /// Dominant subspace dimension for the angle bound.
    #[arg(long)]
    k: Option<usize>,
    /// Eigenvalue gap at k (required with --k when parameters are
    /// explicit; computed from the function spec otherwise).
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy)]
enum CertKind {
    RelativeError,
    SampleSize,
    Angle,
    BernsteinTail,
    ExpectationMarkov,
    PriorWork,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long, value_enum)]
    kind: CertKind,
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long = "norm-e")]
    norm_e: Option<f64>,
    #[arg(long)]
    intdim: Option<f64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Top eigenvalue and the two eigenvalues around the split (angle and
    /// prior-work kinds).
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long = "lambda-k")]
    lambda_k: Option<f64>,
    #[arg(long = "lambda-k1")]
    lambda_k1: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// Matrix-variance parameter (prior-work kind).
    #[arg(long)]
    nu: Option<f64>,
    /// Ambient dimension (prior-work kind).
    #[arg(long)]
    m: Option<usize>,
    /// Bernstein-tail inputs.
    #[arg(long = "norm-p")]
    norm_p: Option<f64>,
    #[arg(long = "intdim-p")]
    intdim_p: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long = "eps-abs")]
    eps_abs: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    /// Reference matrix file (text format: dimension line, then rows).
    matrix_a: PathBuf,
    /// Perturbed matrix file.
    matrix_b: PathBuf,
    /// Dominant subspace dimension.
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config's master_seed. Required when the
    /// config has none — there is no hidden entropy.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV/JSON reports.
    #[arg(long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct InfoArgs {
    /// Builtin function spec: JSON file path or inline JSON.
    #[arg(long)]
    function: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn load_function_spec(arg: &str) -> Result<FunctionSpec, Error> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)?
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("invalid function spec: {e}")))
}

fn require<T: Copy>(value: Option<T>, flag: &str) -> Result<T, Error> {
    value.ok_or_else(|| Error::InvalidArgument(format!("--{flag} is required for this certificate kind")))
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) | Error::Parse(_) | Error::Config(_) | Error::Io(_) => 2,
        Error::Domain(_)
        | Error::UnsupportedSize(_)
        | Error::ModelViolation(_)
        | Error::NoConvergence { .. }
        | Error::Numerical(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Plan(args) => cmd_plan(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Info(args) => cmd_info(args),
    }
}

fn cmd_plan(args: PlanArgs) -> Result<u8, Error> {
    let (params, spec) = args.problem.resolve(args.epsilon, args.delta)?;
    let n = required_samples(&params)?;
    let at_n = relative_error_bound(&params.with_n(n))?;

    let mut out = serde_json::json!({
        "n": n,
        "gamma_at_n": at_n.intermediate("gamma"),
        "bound_at_n": at_n.value,
        "epsilon": params.epsilon,
        "delta": params.delta,
        "lipschitz_l": params.lipschitz_l,
        "norm_e": params.norm_e,
        "intdim_e": params.intdim_e,
        "smoothness_ratio": params.smoothness_ratio(),
    });

    let mut exit = 0u8;
    if let Some(k) = args.k {
        let cert: BoundCertificate = match (&spec, args.gap) {
            (Some(spec), _) => angle_certificate_for(spec, k, args.epsilon, args.delta)?,
            (None, Some(gap)) => {
                if !(gap > 0.0) {
                    return Err(Error::Domain(format!(
                        "dominant subspace undefined: gap must be positive, got {gap}"
                    )));
                }
                // Explicit parameters carry no spectrum; anchor the gap at
                // the top of the admissible range.
                let g = GapInfo::new(k, params.norm_e, params.norm_e - gap);
                angle_certificate(&params.with_n(n), &g)?
            }
            (None, None) => {
                return Err(Error::InvalidArgument(
                    "--k with explicit parameters also needs --gap".into(),
                ))
            }
        };
        out["angle"] = serde_json::to_value(&cert).expect("serializable");
        if !cert.assumptions_ok {
            exit = 4;
        }
    }

    print_value(&out, args.format);
    if exit != 0 {
        eprintln!("hypothesis failed: see the assumptions array in the certificate");
    }
    Ok(exit)
}

fn cmd_certify(args: CertifyArgs) -> Result<u8, Error> {
    let cert = match args.kind {
        CertKind::RelativeError => {
            let p = ProblemParams {
                lipschitz_l: require(args.lipschitz, "lipschitz")?,
                norm_e: require(args.norm_e, "norm-e")?,
                intdim_e: require(args.intdim, "intdim")?,
                n: require(args.samples, "samples")?,
                delta: require(args.delta, "delta")?,
                epsilon: args.epsilon.unwrap_or(0.5),
            };
            relative_error_bound(&p)?
        }
        CertKind::SampleSize => {
            let p = PlannerParams {
                lipschitz_l: require(args.lipschitz, "lipschitz")?,
                norm_e: require(args.norm_e, "norm-e")?,
                intdim_e: require(args.intdim, "intdim")?,
                delta: require(args.delta, "delta")?,
                epsilon: require(args.epsilon, "epsilon")?,
            };
            sample_size_certificate(&p)?
        }
        CertKind::Angle => {
            let p = ProblemParams {
                lipschitz_l: require(args.lipschitz, "lipschitz")?,
                norm_e: require(args.norm_e, "norm-e")?,
                intdim_e: require(args.intdim, "intdim")?,
                n: require(args.samples, "samples")?,
                delta: require(args.delta, "delta")?,
                epsilon: require(args.epsilon, "epsilon")?,
            };
            let g = GapInfo::new(
                require(args.k, "k")?,
                require(args.lambda_k, "lambda-k")?,
                require(args.lambda_k1, "lambda-k1")?,
            );
            angle_certificate(&p, &g)?
        }
        CertKind::BernsteinTail => bernstein_tail(
            require(args.norm_p, "norm-p")?,
            require(args.intdim_p, "intdim-p")?,
            require(args.beta, "beta")?,
            require(args.eps_abs, "eps-abs")?,
        )?,
        CertKind::ExpectationMarkov => {
            let p = ProblemParams {
                lipschitz_l: require(args.lipschitz, "lipschitz")?,
                norm_e: require(args.norm_e, "norm-e")?,
                intdim_e: require(args.intdim, "intdim")?,
                n: require(args.samples, "samples")?,
                delta: require(args.delta, "delta")?,
                epsilon: args.epsilon.unwrap_or(0.5),
            };
            expectation_markov_bound(&p)?
        }
        CertKind::PriorWork => prior_work_samples(
            require(args.lambda1, "lambda1")?,
            require(args.nu, "nu")?,
            require(args.lipschitz, "lipschitz")?,
            require(args.epsilon, "epsilon")?,
            require(args.m, "m")?,
        )?,
    };
    print_value(&serde_json::to_value(&cert).expect("serializable"), args.format);
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, Error> {
    let a = SymmetricMatrix::read_text_file(&args.matrix_a)?;
    let b = SymmetricMatrix::read_text_file(&args.matrix_b)?;
    let report = theorem_t1_check(&a, &b, args.k)?;
    print_value(&serde_json::to_value(&report).expect("serializable"), args.format);
    if report.hypothesis_ok {
        Ok(0)
    } else {
        eprintln!(
            "hypothesis failed: perturbation norm {} is not below gap/4 = {}",
            report.tau,
            report.gap_info.gap() / 4.0
        );
        Ok(4)
    }
}

fn cmd_experiment(args: ExperimentArgs) -> Result<u8, Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let report = run_experiment(&cfg, args.seed)?;
    let paths = report.write_files(&args.out_dir, cfg.output_prefix())?;
    println!("experiment: {}", report.experiment);
    println!("config_fingerprint: {}", report.config_fingerprint);
    println!("master_seed: {}", report.master_seed);
    println!("soundness_ok: {}", report.soundness_ok);
    for p in &paths {
        println!("wrote: {}", p.display());
    }
    if report.soundness_ok {
        Ok(0)
    } else {
        eprintln!("soundness check failed: see the report for the offending rows");
        Ok(4)
    }
}

fn cmd_info(args: InfoArgs) -> Result<u8, Error> {
    let spec = load_function_spec(&args.function)?;
    let summary = function_summary(&spec, args.k)?;
    print_value(&serde_json::to_value(&summary).expect("serializable"), args.format);
    Ok(0)
}
