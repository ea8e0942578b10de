//! Prior estimation from privatized labels.
//!
//! [`estimate_prior`] spends a budget `epsilon1` to Laplace-randomize every
//! label once, then builds a histogram of the randomized values and returns
//! it as a [`StepDensity`]. The histogram is anchored at the sample mean with
//! bins of width `sigma`, extended to cover `[min, max]` exactly, so the bin
//! layout itself is a function of the already-privatized data only (free
//! post-processing). No deconvolution is attempted: the estimate is the
//! prior *of the randomized labels*, which is what the downstream interval
//! optimization consumes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::additive::{laplace_randomize, AdditiveNoiseSpec, NoiseKind};
use crate::error::{Error, Result};
use crate::step_density::StepDensity;

/// Cap on histogram size; a pathological `sigma` (e.g. denormal) would
/// otherwise ask for billions of bins.
pub const MAX_BINS: u64 = 1_000_000;

/// How the histogram bin width is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaPolicy {
    /// Standard deviation of the randomized labels (population form).
    StdOfRandomized,
    /// A caller-provided width, for when the default is too coarse or fine.
    Fixed(f64),
}

impl Default for SigmaPolicy {
    fn default() -> Self {
        Self::StdOfRandomized
    }
}

/// Everything needed to reconstruct (and audit) the histogram layout.
///
/// Interior nodes sit at `mu + i sigma` for integers `i` in
/// `k0 + 1 ..= k1`; the first and last nodes are the randomized min and max,
/// so the index bounds satisfy
///
/// ```text
/// mu + k0 sigma <= min < mu + (k0 + 1) sigma
/// mu + k1 sigma <  max <= mu + (k1 + 1) sigma
/// ```
///
/// When `degenerate` is set the randomized labels were all identical; the
/// plan then describes the fallback single bin centered on that value and
/// the inequalities above are waived (`k0 = k1 = -1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramPlan {
    pub mu: f64,
    pub sigma: f64,
    pub k0: i64,
    pub k1: i64,
    pub nodes: Vec<f64>,
    pub bin_counts: Vec<u64>,
    pub degenerate: bool,
}

impl HistogramPlan {
    /// Total number of randomized labels counted.
    pub fn n(&self) -> u64 {
        self.bin_counts.iter().sum()
    }

    /// Per-bin probability masses `count / n`.
    pub fn masses(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.bin_counts.iter().map(|c| *c as f64 / n).collect()
    }
}

/// Estimates a step-density prior from labels, spending `epsilon1`.
///
/// `noise` must be the Laplace spec that carries that same budget; passing
/// both makes the composition accounting explicit at the call site. Each
/// label consumes exactly one uniform from `rng`.
pub fn estimate_prior<R: Rng + ?Sized>(
    labels: &[f64],
    epsilon1: f64,
    noise: &AdditiveNoiseSpec,
    sigma_policy: SigmaPolicy,
    rng: &mut R,
) -> Result<(StepDensity, HistogramPlan)> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(epsilon1 > 0.0) {
        return Err(Error::NonPositiveEpsilon { epsilon: epsilon1 });
    }
    if noise.kind() != NoiseKind::Laplace {
        return Err(Error::WrongKind {
            expected: NoiseKind::Laplace,
            got: noise.kind(),
        });
    }
    if noise.epsilon() != epsilon1 {
        return Err(Error::BudgetMismatch {
            expected: epsilon1,
            got: noise.epsilon(),
        });
    }
    if let Some(policy_sigma) = fixed_sigma(sigma_policy) {
        if !(policy_sigma > 0.0) || !policy_sigma.is_finite() {
            return Err(Error::NonPositiveSigma { sigma: policy_sigma });
        }
    }
    for (row, y) in labels.iter().enumerate() {
        if !y.is_finite() {
            return Err(Error::BadLabel {
                row,
                value: y.to_string(),
            });
        }
    }

    let n = labels.len();
    let mut randomized = Vec::with_capacity(n);
    for &y in labels {
        let r = laplace_randomize(y, noise, rng)?;
        if !r.is_finite() {
            // extreme scale (tiny epsilon, huge sensitivity) overflowed
            return Err(Error::NonFiniteValue {
                what: "randomized label",
            });
        }
        randomized.push(r);
    }

    let mu = randomized.iter().sum::<f64>() / n as f64;
    if !mu.is_finite() {
        return Err(Error::NonFiniteValue {
            what: "randomized label mean",
        });
    }
    let min = randomized.iter().copied().fold(f64::INFINITY, f64::min);
    let max = randomized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(min < max) {
        return degenerate_plan(min, n as u64);
    }

    let sigma = match sigma_policy {
        SigmaPolicy::Fixed(s) => s,
        SigmaPolicy::StdOfRandomized => {
            let var = randomized.iter().map(|r| (r - mu).powi(2)).sum::<f64>() / n as f64;
            let s = var.sqrt();
            if !(s > 0.0) {
                // spread exists but underflows the variance; fall back
                return degenerate_plan(mu, n as u64);
            }
            s
        }
    };
    if !sigma.is_finite() {
        return Err(Error::NonFiniteValue {
            what: "bin width sigma",
        });
    }
    // keeps the index search bounded before any integer arithmetic runs
    let approx_bins = (max - min) / sigma;
    if !(approx_bins <= MAX_BINS as f64) {
        return Err(Error::TooManyBins {
            bins: approx_bins as u64,
            cap: MAX_BINS,
        });
    }

    // integer bin anchors: start from the float guess, then nudge until the
    // defining inequalities hold exactly in f64 arithmetic
    let mut k0 = ((min - mu) / sigma).floor() as i64;
    while mu + k0 as f64 * sigma > min {
        k0 -= 1;
    }
    while mu + (k0 + 1) as f64 * sigma <= min {
        k0 += 1;
    }
    let mut k1 = ((max - mu) / sigma).ceil() as i64 - 1;
    while mu + (k1 + 1) as f64 * sigma < max {
        k1 += 1;
    }
    while mu + k1 as f64 * sigma >= max {
        k1 -= 1;
    }

    let bins = (k1 - k0 + 1) as u64;
    if bins > MAX_BINS {
        return Err(Error::TooManyBins {
            bins,
            cap: MAX_BINS,
        });
    }

    let mut nodes = Vec::with_capacity(bins as usize + 1);
    nodes.push(min);
    for i in (k0 + 1)..=k1 {
        nodes.push(mu + i as f64 * sigma);
    }
    nodes.push(max);

    let mut bin_counts = vec![0u64; bins as usize];
    let last = bins as usize - 1;
    for &r in &randomized {
        let p = nodes.partition_point(|&node| node <= r);
        bin_counts[(p - 1).min(last)] += 1;
    }

    let masses: Vec<f64> = bin_counts.iter().map(|c| *c as f64 / n as f64).collect();
    let density = StepDensity::from_bin_masses(nodes.clone(), masses)?;
    let plan = HistogramPlan {
        mu,
        sigma,
        k0,
        k1,
        nodes,
        bin_counts,
        degenerate: false,
    };
    Ok((density, plan))
}

fn fixed_sigma(policy: SigmaPolicy) -> Option<f64> {
    match policy {
        SigmaPolicy::Fixed(s) => Some(s),
        SigmaPolicy::StdOfRandomized => None,
    }
}

/// All randomized labels collapsed to one point `c`: emit one narrow bin
/// around it instead of failing the whole pipeline.
fn degenerate_plan(c: f64, n: u64) -> Result<(StepDensity, HistogramPlan)> {
    let half_width = c.abs().max(1.0) * 1e-6;
    let nodes = vec![c - half_width, c + half_width];
    let density = StepDensity::from_heights(nodes.clone(), vec![1.0])?;
    let plan = HistogramPlan {
        mu: c,
        sigma: half_width,
        k0: -1,
        k1: -1,
        nodes,
        bin_counts: vec![n],
        degenerate: true,
    };
    Ok((density, plan))
}
