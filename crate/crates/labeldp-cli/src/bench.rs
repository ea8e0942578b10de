//! Desk-scale mechanism comparison.
//!
//! Protocol: labels are min-max scaled to [0, 1] (so the additive baselines
//! get sensitivity 1), each trial draws a fresh 80/20 split, the training
//! labels are privatized, a closed-form ridge regressor is fit on them, and
//! test MSE is measured against the true held-out labels. Trials share
//! their splits across mechanisms so rows are paired, and run in parallel
//! with derived seeds; output order is fixed regardless of scheduling.

use std::path::{Path, PathBuf};
use std::thread;

use clap::Args;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use labeldp::additive::{gaussian_randomize, laplace_randomize, AdditiveNoiseSpec};
use labeldp::dataset::{read_labeled_csv, LabeledDataset};
use labeldp::mechanism::PolicyKind;
use labeldp::pipeline::{privatize_dataset, PrivacyBudgetSplit};
use labeldp::prior::SigmaPolicy;
use labeldp::seeding::{make_rng, stream_seed};

use crate::{classify, config, parse_epsilon, Failure};

/// Streams carved out of the base seed; disjoint from the pipeline's own.
const STAGE_DATA: u64 = 11;
const STAGE_SPLIT: u64 = 12;
const STAGE_NOISE: u64 = 13;

const GAUSSIAN_DELTA: f64 = 1e-4;

#[derive(Args)]
pub struct BenchArgs {
    /// Input CSV with numeric feature columns and a label column
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    input: Option<PathBuf>,
    /// Name of the label column
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Generate a synthetic linear task instead: `n,d`
    #[arg(long, value_parser = parse_synthetic)]
    synthetic: Option<(usize, usize)>,
    /// Budgets to sweep; `inf` maps to a no-noise pass-through
    #[arg(long, value_delimiter = ',', value_parser = parse_epsilon, default_value = "0.1,0.5,1,inf")]
    epsilons: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Neighborhood half-width for the interval randomizer
    #[arg(long, default_value_t = 0.2)]
    zeta: f64,
    /// Fraction of each budget spent on prior estimation
    #[arg(long, default_value_t = 0.5)]
    split_fraction: f64,
    /// Ridge coefficient
    #[arg(long, default_value_t = 1e-4)]
    lambda: f64,
    #[arg(long, env = "LABELDP_SEED", default_value_t = 0)]
    seed: u64,
    /// Output CSV (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_synthetic(s: &str) -> Result<(usize, usize), String> {
    let (n, d) = s
        .split_once(',')
        .ok_or_else(|| format!("expected n,d, got {s:?}"))?;
    let n: usize = n.trim().parse().map_err(|e| format!("bad n: {e}"))?;
    let d: usize = d.trim().parse().map_err(|e| format!("bad d: {e}"))?;
    if n < 10 || d == 0 {
        return Err("need n >= 10 and d >= 1".into());
    }
    Ok((n, d))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mechanism {
    None,
    Laplace,
    Gaussian,
    RpWithPrior,
}

impl Mechanism {
    const NOISY: [Mechanism; 3] = [Mechanism::Laplace, Mechanism::Gaussian, Mechanism::RpWithPrior];

    fn name(self) -> &'static str {
        match self {
            Mechanism::None => "none",
            Mechanism::Laplace => "laplace",
            Mechanism::Gaussian => "gaussian",
            Mechanism::RpWithPrior => "rp_with_prior",
        }
    }

    fn index(self) -> u64 {
        match self {
            Mechanism::None => 0,
            Mechanism::Laplace => 1,
            Mechanism::Gaussian => 2,
            Mechanism::RpWithPrior => 3,
        }
    }
}

/// A regression task: feature matrix with trailing bias column, labels in
/// [0, 1].
pub struct Task {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
}

pub struct BenchSettings {
    pub epsilons: Vec<f64>,
    pub trials: usize,
    pub zeta: f64,
    pub split_fraction: f64,
    pub lambda: f64,
    pub seed: u64,
}

pub struct BenchRow {
    pub mechanism: &'static str,
    pub epsilon: f64,
    pub mean_mse: f64,
    pub std_mse: f64,
    pub trials: usize,
}

fn minmax_scale(raw: &[f64]) -> Result<Vec<f64>, Failure> {
    let lo = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(config("labels must be finite"));
    }
    if lo == hi {
        return Err(config("labels are constant; nothing to regress"));
    }
    Ok(raw.iter().map(|y| (y - lo) / (hi - lo)).collect())
}

fn with_bias(features: DMatrix<f64>) -> DMatrix<f64> {
    let d = features.ncols();
    features.insert_column(d, 1.0)
}

/// `y = w'x + noise` with the noise twice the signal scale, so the labels
/// are hard to predict and the comparison is dominated by label noise.
pub fn synthetic_task(n: usize, d: usize, seed: u64) -> Task {
    let mut rng = make_rng(stream_seed(seed, STAGE_DATA, 0));
    let w: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let features = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
    let signal: Vec<f64> = (0..n)
        .map(|i| (0..d).map(|j| features[(i, j)] * w[j]).sum())
        .collect();
    let mean = signal.iter().sum::<f64>() / n as f64;
    let var = signal.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n as f64;
    let noise_std = 2.0 * var.sqrt();
    let raw: Vec<f64> = signal
        .iter()
        .map(|s| {
            let z: f64 = StandardNormal.sample(&mut rng);
            s + noise_std * z
        })
        .collect();
    let y = minmax_scale(&raw).expect("synthetic labels are non-constant");
    Task {
        x: with_bias(features),
        y: DVector::from_vec(y),
    }
}

pub fn csv_task(path: &Path, label_column: &str) -> Result<Task, Failure> {
    let (data, _) = read_labeled_csv(path, label_column).map_err(classify)?;
    if data.is_empty() {
        return Err(config("dataset is empty"));
    }
    let d = data.rows[0].payload.len();
    if d == 0 {
        return Err(config("dataset has no feature columns"));
    }
    let mut features = DMatrix::zeros(data.len(), d);
    for (i, row) in data.rows.iter().enumerate() {
        for (j, field) in row.payload.iter().enumerate() {
            features[(i, j)] = field.trim().parse().map_err(|e| {
                Failure::Io(format!("row {i}: feature column {j} ({field:?}): {e}"))
            })?;
        }
    }
    let y = minmax_scale(&data.labels())?;
    Ok(Task {
        x: with_bias(features),
        y: DVector::from_vec(y),
    })
}

/// Closed-form ridge: `(X'X/n + lambda I) w = X'y/n`.
fn ridge_fit(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let n = x.nrows() as f64;
    let d = x.ncols();
    let gram = x.transpose() * x / n + DMatrix::identity(d, d) * lambda;
    let moment = x.transpose() * y / n;
    gram.cholesky()
        .expect("ridge system is positive definite")
        .solve(&moment)
}

fn gather_rows(x: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), x.ncols(), |r, c| x[(idx[r], c)])
}

fn privatize_labels(
    labels: &[f64],
    mech: Mechanism,
    epsilon: f64,
    settings: &BenchSettings,
    job_seed: u64,
) -> Result<Vec<f64>, Failure> {
    if mech == Mechanism::None || epsilon == f64::INFINITY {
        return Ok(labels.to_vec());
    }
    match mech {
        Mechanism::Laplace => {
            let spec = AdditiveNoiseSpec::laplace(epsilon, 1.0, Some((0.0, 1.0)))
                .map_err(classify)?;
            let mut rng = make_rng(job_seed);
            labels
                .iter()
                .map(|&y| laplace_randomize(y, &spec, &mut rng).map_err(classify))
                .collect()
        }
        Mechanism::Gaussian => {
            let spec = AdditiveNoiseSpec::gaussian(epsilon, GAUSSIAN_DELTA, 1.0, Some((0.0, 1.0)))
                .map_err(classify)?;
            let mut rng = make_rng(job_seed);
            labels
                .iter()
                .map(|&y| gaussian_randomize(y, &spec, &mut rng).map_err(classify))
                .collect()
        }
        Mechanism::RpWithPrior => {
            let data = LabeledDataset::from_labels(labels.iter().copied())
                .with_label_bounds(0.0, 1.0)
                .map_err(classify)?;
            let split = PrivacyBudgetSplit::new(epsilon, epsilon * settings.split_fraction)
                .map_err(classify)?;
            let (out, _) = privatize_dataset(
                &data,
                &split,
                settings.zeta,
                PolicyKind::Projection,
                SigmaPolicy::StdOfRandomized,
                job_seed,
            )
            .map_err(classify)?;
            Ok(out.labels())
        }
        Mechanism::None => unreachable!(),
    }
}

fn run_trial(
    task: &Task,
    settings: &BenchSettings,
    mech: Mechanism,
    epsilon: f64,
    eps_index: usize,
    trial: usize,
) -> Result<f64, Failure> {
    let n = task.x.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    // the split stream depends only on the trial, so every mechanism row
    // sees the same 10 splits
    let mut split_rng = make_rng(stream_seed(settings.seed, STAGE_SPLIT, trial as u64));
    order.shuffle(&mut split_rng);
    let cut = (n * 4) / 5;
    let (train_idx, test_idx) = order.split_at(cut);

    let train_labels: Vec<f64> = train_idx.iter().map(|&i| task.y[i]).collect();
    let tag = (mech.index() << 48) | ((eps_index as u64) << 32) | trial as u64;
    let job_seed = stream_seed(settings.seed, STAGE_NOISE, tag);
    let noisy = privatize_labels(&train_labels, mech, epsilon, settings, job_seed)?;

    let x_train = gather_rows(&task.x, train_idx);
    let w = ridge_fit(&x_train, &DVector::from_vec(noisy), settings.lambda);

    let mse = test_idx
        .iter()
        .map(|&i| {
            let pred: f64 = task.x.row(i).transpose().dot(&w);
            let err = pred - task.y[i];
            err * err
        })
        .sum::<f64>()
        / test_idx.len() as f64;
    Ok(mse)
}

fn summarize(
    task: &Task,
    settings: &BenchSettings,
    mech: Mechanism,
    epsilon: f64,
    eps_index: usize,
) -> Result<BenchRow, Failure> {
    let mut outcomes: Vec<Result<f64, Failure>> = (0..settings.trials).map(|_| Ok(0.0)).collect();
    thread::scope(|scope| {
        for (trial, slot) in outcomes.iter_mut().enumerate() {
            scope.spawn(move || {
                *slot = run_trial(task, settings, mech, epsilon, eps_index, trial);
            });
        }
    });
    let mut mses = Vec::with_capacity(settings.trials);
    for outcome in outcomes {
        mses.push(outcome?);
    }
    let k = mses.len() as f64;
    let mean = mses.iter().sum::<f64>() / k;
    let std = if mses.len() < 2 {
        0.0
    } else {
        (mses.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (k - 1.0)).sqrt()
    };
    Ok(BenchRow {
        mechanism: mech.name(),
        epsilon,
        mean_mse: mean,
        std_mse: std,
        trials: mses.len(),
    })
}

pub fn run_bench(task: &Task, settings: &BenchSettings) -> Result<Vec<BenchRow>, Failure> {
    if settings.trials == 0 {
        return Err(config("need at least one trial"));
    }
    if !(settings.split_fraction > 0.0 && settings.split_fraction < 1.0) {
        return Err(config("split fraction must be in (0, 1)"));
    }
    if settings.epsilons.is_empty() {
        return Err(config("need at least one epsilon"));
    }
    if task.x.nrows() < 10 {
        return Err(config("need at least 10 rows"));
    }
    let mut epsilons = settings.epsilons.clone();
    epsilons.sort_by(f64::total_cmp);
    epsilons.dedup();

    // the no-noise baseline appears once; budget is irrelevant to it
    let mut rows = vec![summarize(task, settings, Mechanism::None, f64::INFINITY, 0)?];
    for mech in Mechanism::NOISY {
        for (eps_index, &epsilon) in epsilons.iter().enumerate() {
            rows.push(summarize(task, settings, mech, epsilon, eps_index)?);
        }
    }
    Ok(rows)
}

fn fmt_epsilon(e: f64) -> String {
    if e == f64::INFINITY {
        "inf".into()
    } else {
        format!("{e}")
    }
}

pub fn run(args: BenchArgs) -> Result<(), Failure> {
    let task = match (&args.input, args.synthetic) {
        (Some(path), None) => csv_task(path, &args.label_column)?,
        (None, Some((n, d))) => synthetic_task(n, d, args.seed),
        _ => return Err(config("provide exactly one of --input or --synthetic")),
    };
    let settings = BenchSettings {
        epsilons: args.epsilons.clone(),
        trials: args.trials,
        zeta: args.zeta,
        split_fraction: args.split_fraction,
        lambda: args.lambda,
        seed: args.seed,
    };
    let rows = run_bench(&task, &settings)?;

    let mut writer: csv::Writer<Box<dyn std::io::Write>> = match &args.output {
        Some(path) => csv::Writer::from_writer(Box::new(
            std::fs::File::create(path)
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?,
        )),
        None => csv::Writer::from_writer(Box::new(std::io::stdout())),
    };
    writer
        .write_record(["mechanism", "epsilon", "mean_test_mse", "std_test_mse", "trials", "seed"])
        .and_then(|()| {
            for row in &rows {
                writer.write_record([
                    row.mechanism.to_string(),
                    fmt_epsilon(row.epsilon),
                    format!("{}", row.mean_mse),
                    format!("{}", row.std_mse),
                    row.trials.to_string(),
                    args.seed.to_string(),
                ])?;
            }
            writer.flush().map_err(csv::Error::from)
        })
        .map_err(|e| Failure::Io(format!("cannot write results: {e}")))
}
