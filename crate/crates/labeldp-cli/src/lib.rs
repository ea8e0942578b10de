//! Command line front end: dataset privatization, prior estimation,
//! interval search, auditing and a desk-scale mechanism benchmark.
//!
//! Exit codes: 0 success, 2 configuration error (bad flags, invalid
//! parameters, off-grid preset lookups), 3 I/O error (missing or malformed
//! files), 4 audit failure. Every artifact embeds the seed and parameters
//! that produced it, so any run can be replayed from its outputs.

pub mod bench;
pub mod presets;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use labeldp::additive::AdditiveNoiseSpec;
use labeldp::audit::{analytic_audit_against, default_pairs, empirical_audit_with_sampler};
use labeldp::dataset::{read_labeled_csv, write_labeled_csv};
use labeldp::mechanism::{PolicyKind, RandomizerSpec};
use labeldp::optimizer::optimal_interval;
use labeldp::pipeline::{privatize_dataset, PrivacyBudgetSplit};
use labeldp::prior::{estimate_prior, SigmaPolicy};
use labeldp::seeding::{make_rng, stream_seed, STAGE_PRIOR};
use labeldp::step_density::StepDensity;
use presets::Preset;

/// A command failure carrying its process exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Io(String),
    Audit,
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
            Failure::Audit => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(msg) => write!(f, "{msg}"),
            Failure::Io(msg) => write!(f, "{msg}"),
            Failure::Audit => write!(f, "audit failed: the spec exceeds its claimed budget"),
        }
    }
}

fn config(msg: impl fmt::Display) -> Failure {
    Failure::Config(msg.to_string())
}

/// Library errors split into "your parameters are wrong" and "your files
/// are wrong".
fn classify(err: labeldp::Error) -> Failure {
    use labeldp::Error::*;
    match err {
        Csv(_) | Io(_) | BadLabel { .. } => Failure::Io(err.to_string()),
        _ => Failure::Config(err.to_string()),
    }
}

#[derive(Parser)]
#[command(name = "labeldp", version, about = "Label differential privacy for regression datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the optimal randomization interval for a step prior
    OptimalInterval(OptimalIntervalArgs),
    /// Estimate a step prior from Laplace-randomized labels
    EstimatePrior(EstimatePriorArgs),
    /// Privatize the label column of a CSV dataset end to end
    Privatize(PrivatizeArgs),
    /// Certify a randomizer spec against its claimed budget
    Audit(AuditArgs),
    /// Compare mechanisms on a ridge regression task
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Projection,
    UniformOutside,
}

impl From<PolicyArg> for PolicyKind {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Projection => PolicyKind::Projection,
            PolicyArg::UniformOutside => PolicyKind::UniformOutside,
        }
    }
}

/// Accepts a non-negative number or `inf`.
fn parse_epsilon(s: &str) -> Result<f64, String> {
    let v = match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => f64::INFINITY,
        other => other
            .parse::<f64>()
            .map_err(|e| format!("invalid epsilon {s:?}: {e}"))?,
    };
    if v.is_nan() || v < 0.0 {
        return Err(format!("epsilon must be non-negative, got {s}"));
    }
    Ok(v)
}

/// Accepts `lo,hi` with lo < hi.
fn parse_bounds(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(format!("bounds must satisfy lo < hi, got {s}"));
    }
    Ok((lo, hi))
}

#[derive(clap::Args)]
struct OptimalIntervalArgs {
    /// Step-prior JSON file
    #[arg(long)]
    prior: PathBuf,
    /// Neighborhood half-width
    #[arg(long)]
    zeta: f64,
    /// Randomization budget
    #[arg(long, value_parser = parse_epsilon)]
    epsilon: f64,
    /// Destination (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct EstimatePriorArgs {
    /// Input CSV with a numeric label column
    #[arg(long)]
    input: PathBuf,
    /// Name of the label column
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Budget for the estimation stage
    #[arg(long)]
    epsilon1: f64,
    /// Fixed histogram bin width (default: std of the randomized labels)
    #[arg(long)]
    sigma: Option<f64>,
    /// Public label bounds `lo,hi`; sets the Laplace sensitivity and clips
    #[arg(long, value_parser = parse_bounds)]
    label_bounds: Option<(f64, f64)>,
    #[arg(long, env = "LABELDP_SEED", default_value_t = 0)]
    seed: u64,
    /// Destination (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct PrivatizeArgs {
    /// Input CSV with a numeric label column
    #[arg(long)]
    input: PathBuf,
    /// Name of the label column
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Total privacy budget (`inf` for a pass-through)
    #[arg(long, value_parser = parse_epsilon)]
    epsilon: f64,
    /// Estimation-stage budget; defaults to the preset's value or epsilon/2
    #[arg(long)]
    epsilon1: Option<f64>,
    /// Neighborhood half-width; defaults to the preset's value
    #[arg(long)]
    zeta: Option<f64>,
    /// Tuned parameter table: crime, criteo or housing
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long, value_enum, default_value_t = PolicyArg::Projection)]
    policy: PolicyArg,
    /// Fixed histogram bin width for the prior stage
    #[arg(long)]
    sigma: Option<f64>,
    /// Public label bounds `lo,hi`
    #[arg(long, value_parser = parse_bounds)]
    label_bounds: Option<(f64, f64)>,
    /// Append a `<label>_original` column to the output
    #[arg(long)]
    keep_original: bool,
    /// Output CSV path
    #[arg(long)]
    output: PathBuf,
    /// Run-report JSON destination (stdout when omitted)
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, env = "LABELDP_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args)]
struct AuditArgs {
    /// Randomizer spec JSON, either bare or `{"spec": ..., "claimed_epsilon": ...}`
    #[arg(long)]
    spec: PathBuf,
    /// Budget to audit against (default: the spec's own epsilon)
    #[arg(long, value_parser = parse_epsilon)]
    claimed_epsilon: Option<f64>,
    /// Also run the sampling-based audit
    #[arg(long)]
    empirical: bool,
    /// Samples per label per pair for the empirical audit
    #[arg(long, default_value_t = 200_000)]
    samples: u64,
    /// Histogram bins for the empirical audit
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long, env = "LABELDP_SEED", default_value_t = 0)]
    seed: u64,
    /// Report destination (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

/// On-disk audit input: a spec plus an optional externally claimed budget.
#[derive(Deserialize)]
struct AuditFile {
    spec: RandomizerSpec,
    #[serde(default)]
    claimed_epsilon: Option<f64>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Io(format!("cannot parse {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable artifact");
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_optimal_interval(args: OptimalIntervalArgs) -> Result<(), Failure> {
    let prior: StepDensity = read_json(&args.prior)?;
    let result = optimal_interval(&prior, args.zeta, args.epsilon).map_err(classify)?;
    write_json(
        args.output.as_deref(),
        &serde_json::json!({
            "zeta": args.zeta,
            "epsilon": args.epsilon,
            "a1": result.interval.a1,
            "a2": result.interval.a2,
            "objective": result.objective,
            "evaluations": result.evaluations,
        }),
    )
}

/// The estimation stage mirrors the pipeline: sensitivity is the public
/// label range when bounds are given, 1 otherwise.
fn stage1_noise(epsilon1: f64, bounds: Option<(f64, f64)>) -> Result<AdditiveNoiseSpec, Failure> {
    match bounds {
        Some((lo, hi)) => AdditiveNoiseSpec::laplace(epsilon1, hi - lo, Some((lo, hi))),
        None => AdditiveNoiseSpec::laplace(epsilon1, 1.0, None),
    }
    .map_err(classify)
}

fn run_estimate_prior(args: EstimatePriorArgs) -> Result<(), Failure> {
    let (mut data, _) = read_labeled_csv(&args.input, &args.label_column).map_err(classify)?;
    if let Some((lo, hi)) = args.label_bounds {
        data = data.with_label_bounds(lo, hi).map_err(classify)?;
    }
    let noise = stage1_noise(args.epsilon1, args.label_bounds)?;
    let sigma_policy = match args.sigma {
        Some(s) => SigmaPolicy::Fixed(s),
        None => SigmaPolicy::StdOfRandomized,
    };
    // same stream as the pipeline's stage 1, so a later privatize run with
    // this seed reproduces this prior exactly
    let mut rng = make_rng(stream_seed(args.seed, STAGE_PRIOR, 0));
    let (prior, plan) = estimate_prior(
        &data.labels(),
        args.epsilon1,
        &noise,
        sigma_policy,
        &mut rng,
    )
    .map_err(classify)?;
    write_json(
        args.output.as_deref(),
        &serde_json::json!({
            "epsilon1": args.epsilon1,
            "sigma_policy": sigma_policy,
            "seed": args.seed,
            "label_column": args.label_column,
            "plan": plan,
            "prior": prior,
        }),
    )
}

fn run_privatize(args: PrivatizeArgs) -> Result<(), Failure> {
    let (mut data, layout) = read_labeled_csv(&args.input, &args.label_column).map_err(classify)?;
    if let Some((lo, hi)) = args.label_bounds {
        data = data.with_label_bounds(lo, hi).map_err(classify)?;
    }

    if args.epsilon == f64::INFINITY {
        // no-noise pass-through, mirroring the presets' infinite row
        let original = args.keep_original.then_some(&data);
        write_labeled_csv(&args.output, &layout, &data, original).map_err(classify)?;
        return write_json(
            args.report.as_deref(),
            &serde_json::json!({
                "passthrough": true,
                "epsilon": "inf",
                "seed": args.seed,
            }),
        );
    }

    let preset_params = args
        .preset
        .map(|p| p.lookup(args.epsilon).map_err(config))
        .transpose()?;
    let epsilon1 = args
        .epsilon1
        .or(preset_params.map(|(e1, _)| e1))
        .unwrap_or(args.epsilon / 2.0);
    let zeta = args
        .zeta
        .or(preset_params.map(|(_, z)| z))
        .ok_or_else(|| config("--zeta is required unless --preset provides one"))?;

    let split = PrivacyBudgetSplit::new(args.epsilon, epsilon1).map_err(classify)?;
    let sigma_policy = match args.sigma {
        Some(s) => SigmaPolicy::Fixed(s),
        None => SigmaPolicy::StdOfRandomized,
    };
    let (out, report) = privatize_dataset(
        &data,
        &split,
        zeta,
        args.policy.into(),
        sigma_policy,
        args.seed,
    )
    .map_err(classify)?;

    let original = args.keep_original.then_some(&data);
    write_labeled_csv(&args.output, &layout, &out, original).map_err(classify)?;
    write_json(args.report.as_deref(), &report)
}

fn run_audit(args: AuditArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.spec)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", args.spec.display())))?;
    let (spec, file_claim) = match serde_json::from_str::<AuditFile>(&text) {
        Ok(f) => (f.spec, f.claimed_epsilon),
        Err(_) => (
            serde_json::from_str::<RandomizerSpec>(&text).map_err(|e| {
                Failure::Io(format!("cannot parse {}: {e}", args.spec.display()))
            })?,
            None,
        ),
    };
    let claimed = args
        .claimed_epsilon
        .or(file_claim)
        .unwrap_or_else(|| spec.epsilon());

    let report = if args.empirical {
        let mut rng = make_rng(args.seed);
        empirical_audit_with_sampler(
            &spec,
            claimed,
            &default_pairs(&spec),
            args.samples,
            args.bins,
            &mut rng,
            |y, rng| spec.sample(y, rng),
        )
        .map_err(classify)?
    } else {
        analytic_audit_against(&spec, claimed)
    };

    write_json(args.output.as_deref(), &report)?;
    if report.pass() {
        Ok(())
    } else {
        Err(Failure::Audit)
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::OptimalInterval(args) => run_optimal_interval(args),
        Command::EstimatePrior(args) => run_estimate_prior(args),
        Command::Privatize(args) => run_privatize(args),
        Command::Audit(args) => run_audit(args),
        Command::Bench(args) => bench::run(args),
    }
}

pub fn run() {
    let cli = Cli::parse();
    if let Err(failure) = dispatch(cli) {
        eprintln!("error: {failure}");
        std::process::exit(failure.code());
    }
}
