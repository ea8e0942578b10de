//! Piecewise-constant probability densities.
//!
//! A [`StepDensity`] is the prior object the rest of the crate consumes: a
//! sorted node list `n_0 < n_1 < ... < n_k` and `k` non-negative heights, one
//! per bin `[n_i, n_{i+1})`. The last bin is closed on the right so every
//! point of `[n_0, n_k]` belongs to exactly one bin. Densities are always
//! normalized on construction: callers never see a density whose integral
//! over its support differs from 1 by more than [`NORMALIZATION_TOL`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How far from 1 the total mass may drift after normalization.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A normalized piecewise-constant density.
///
/// Serializes as `{"nodes":[...],"heights":[...]}`. Deserialization runs the
/// same validation as the constructors, so a parsed density is always valid;
/// heights already normalized within [`NORMALIZATION_TOL`] are kept bit-exact
/// so that JSON round-trips are lossless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepDensity")]
pub struct StepDensity {
    nodes: Vec<f64>,
    heights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawStepDensity {
    nodes: Vec<f64>,
    heights: Vec<f64>,
}

impl TryFrom<RawStepDensity> for StepDensity {
    type Error = Error;

    fn try_from(raw: RawStepDensity) -> Result<Self> {
        StepDensity::from_heights(raw.nodes, raw.heights)
    }
}

impl StepDensity {
    /// Builds a density from per-bin heights (probability per label unit).
    ///
    /// Heights are scaled so the density integrates to 1. Inputs that already
    /// integrate to 1 within [`NORMALIZATION_TOL`] are kept unchanged, which
    /// makes normalization idempotent and serialization round-trips exact.
    pub fn from_heights(nodes: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        validate_nodes(&nodes)?;
        validate_values(&nodes, &heights)?;
        let total: f64 = heights
            .iter()
            .zip(nodes.windows(2))
            .map(|(h, w)| h * (w[1] - w[0]))
            .sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::ZeroTotalMass);
        }
        let mut heights = heights;
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            for h in &mut heights {
                *h /= total;
            }
        }
        Ok(Self { nodes, heights })
    }

    /// Builds a density from per-bin masses (e.g. histogram counts / n).
    ///
    /// Each mass is divided by its bin width to obtain a height, then the
    /// result is normalized as in [`StepDensity::from_heights`]. Keeping the
    /// width division here, in one place, is what prevents the classic
    /// mass-vs-height unit mixup downstream.
    pub fn from_bin_masses(nodes: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        validate_nodes(&nodes)?;
        validate_values(&nodes, &masses)?;
        let heights = masses
            .iter()
            .zip(nodes.windows(2))
            .map(|(m, w)| m / (w[1] - w[0]))
            .collect();
        Self::from_heights(nodes, heights)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// Number of bins (`k`).
    pub fn bins(&self) -> usize {
        self.heights.len()
    }

    /// `(n_0, n_k)`.
    pub fn support(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    /// Index of the bin containing `y`, honoring the half-open convention
    /// (last bin closed). `None` outside the support or for NaN.
    pub fn bin_index(&self, y: f64) -> Option<usize> {
        let (lo, hi) = self.support();
        if !(y >= lo && y <= hi) {
            return None;
        }
        let p = self.nodes.partition_point(|&n| n <= y);
        Some((p - 1).min(self.heights.len() - 1))
    }

    /// Density height at `y`; 0 outside `[n_0, n_k]`.
    pub fn pdf_at(&self, y: f64) -> f64 {
        match self.bin_index(y) {
            Some(i) => self.heights[i],
            None => 0.0,
        }
    }

    /// Conditional density given `Y ∈ [lo, hi]`.
    ///
    /// Bins are clipped to `[lo, hi]` and the surviving mass renormalized.
    /// When the restriction captures no mass at all (no overlap, or only
    /// zero-height bins) the result falls back to the uniform density on
    /// `[lo, hi]`: the caller asserted the support, and an estimate that puts
    /// nothing there carries no usable shape information.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<StepDensity> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NonFiniteValue { what: "bound" });
        }
        if !(lo < hi) {
            return Err(Error::ReversedBounds { lo, hi });
        }
        let mut nodes = Vec::new();
        let mut heights = Vec::new();
        for (i, h) in self.heights.iter().enumerate() {
            let a = lo.max(self.nodes[i]);
            let b = hi.min(self.nodes[i + 1]);
            if b > a {
                if nodes.is_empty() {
                    nodes.push(a);
                }
                nodes.push(b);
                heights.push(*h);
            }
        }
        match Self::from_heights(nodes, heights) {
            Err(Error::ZeroTotalMass) | Err(Error::TooFewNodes { .. }) => {
                Self::from_heights(vec![lo, hi], vec![1.0 / (hi - lo)])
            }
            other => other,
        }
    }

    /// Exact integral of the density over `[a, b]`.
    ///
    /// Accumulates `height * overlap` per bin, so there is no quadrature
    /// error. Infinite bounds are fine; `a > b` (or NaN) is
    /// [`Error::ReversedBounds`].
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        if !(a <= b) {
            return Err(Error::ReversedBounds { lo: a, hi: b });
        }
        let mut acc = 0.0;
        for (i, h) in self.heights.iter().enumerate() {
            let lo = a.max(self.nodes[i]);
            let hi = b.min(self.nodes[i + 1]);
            if hi > lo {
                acc += h * (hi - lo);
            }
        }
        Ok(acc)
    }
}

fn validate_nodes(nodes: &[f64]) -> Result<()> {
    if nodes.len() < 2 {
        return Err(Error::TooFewNodes { got: nodes.len() });
    }
    if nodes.iter().any(|n| !n.is_finite()) {
        return Err(Error::NonFiniteValue { what: "node" });
    }
    for (i, w) in nodes.windows(2).enumerate() {
        if !(w[0] < w[1]) {
            return Err(Error::NonMonotoneNodes { index: i + 1 });
        }
    }
    Ok(())
}

fn validate_values(nodes: &[f64], values: &[f64]) -> Result<()> {
    if values.len() != nodes.len() - 1 {
        return Err(Error::BadValueCount {
            nodes: nodes.len(),
            expected: nodes.len() - 1,
            got: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { what: "value" });
    }
    for (i, v) in values.iter().enumerate() {
        if *v < 0.0 {
            return Err(Error::NegativeMass {
                index: i,
                value: *v,
            });
        }
    }
    Ok(())
}
