//! Optimal randomization interval for a step prior.
//!
//! The randomizer's utility objective is
//!
//! ```text
//! F(A1, A2) = 2 zeta / gamma * integral of f_Y over [A1, A2],
//! gamma     = 2 zeta + exp(-epsilon) * (A2 - A1)
//! ```
//!
//! the probability that a label drawn from the prior lands inside its own
//! zeta-neighborhood after randomization. For a piecewise-constant prior the
//! maximizer is found exactly: on each bin-pair rectangle the gradient of F
//! vanishes on at most one axis-aligned line per coordinate, so it suffices
//! to check the rectangle corners plus those critical coordinates
//! ([`critical_points`]). [`optimal_interval`] enumerates all of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::step_density::StepDensity;

/// A closed candidate interval `[a1, a2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a1: f64,
    pub a2: f64,
}

impl Interval {
    pub fn new(a1: f64, a2: f64) -> Result<Self> {
        if !a1.is_finite() || !a2.is_finite() {
            return Err(Error::NonFiniteValue {
                what: "interval endpoint",
            });
        }
        if !(a1 <= a2) {
            return Err(Error::ReversedBounds { lo: a1, hi: a2 });
        }
        Ok(Self { a1, a2 })
    }

    pub fn width(&self) -> f64 {
        self.a2 - self.a1
    }
}

/// Critical-point data for a bin pair `(i, j)`, `i <= j`.
///
/// With `A1` ranging over bin `i` and `A2` over bin `j`, `F` has at most one
/// critical value per coordinate: `A1 = e1` and `A2 = e2`. The intermediate
/// quantities satisfy `c1 - c2 = 2 zeta (alpha_i - alpha_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoints {
    pub h: f64,
    pub c1: f64,
    pub c2: f64,
    pub e1: f64,
    pub e2: f64,
    pub i: usize,
    pub j: usize,
}

/// Outcome of [`optimal_interval`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub interval: Interval,
    /// `F` at the maximizer; a probability.
    pub objective: f64,
    /// Number of candidate evaluations of `F`.
    pub evaluations: u64,
}

fn check_zeta_epsilon(zeta: f64, epsilon: f64) -> Result<()> {
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(Error::NonPositiveZeta { zeta });
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::NegativeEpsilon { epsilon });
    }
    Ok(())
}

fn f_value(d: &StepDensity, a1: f64, a2: f64, zeta: f64, exp_neg_eps: f64) -> f64 {
    let mass = d.integrate(a1, a2).expect("a1 <= a2 checked by caller");
    2.0 * zeta * mass / (2.0 * zeta + exp_neg_eps * (a2 - a1))
}

/// Evaluates `F(a1, a2)` for prior `d`.
pub fn objective_f(d: &StepDensity, a1: f64, a2: f64, zeta: f64, epsilon: f64) -> Result<f64> {
    check_zeta_epsilon(zeta, epsilon)?;
    if !(a1 <= a2) {
        return Err(Error::ReversedBounds { lo: a1, hi: a2 });
    }
    Ok(f_value(d, a1, a2, zeta, (-epsilon).exp()))
}

/// `h`, `c1`, `c2` for the pair `(i, j)`, `i < j`.
fn pair_coefficients(d: &StepDensity, i: usize, j: usize, zeta: f64, exp_neg_eps: f64) -> (f64, f64, f64) {
    debug_assert!(i < j);
    let n = d.nodes();
    let alpha = d.heights();
    let mut h = alpha[i] * n[i + 1] - alpha[j] * n[j];
    for l in (i + 1)..j {
        h += alpha[l] * (n[l + 1] - n[l]);
    }
    let c1 = 2.0 * zeta * alpha[i] - exp_neg_eps * h;
    let c2 = 2.0 * zeta * alpha[j] - exp_neg_eps * h;
    (h, c1, c2)
}

/// Critical coordinates of `F` on the rectangle `bin i x bin j`.
///
/// Undefined when `alpha_i == alpha_j` (the gradient then never vanishes in
/// the interior and only rectangle corners matter), reported as
/// [`Error::EqualHeights`].
pub fn critical_points(
    d: &StepDensity,
    i: usize,
    j: usize,
    zeta: f64,
    epsilon: f64,
) -> Result<CriticalPoints> {
    check_zeta_epsilon(zeta, epsilon)?;
    let k = d.bins();
    assert!(i <= j && j < k, "bin pair ({i}, {j}) out of range for k = {k}");
    let alpha = d.heights();
    if alpha[i] == alpha[j] {
        return Err(Error::EqualHeights { i, j });
    }
    let exp_neg_eps = (-epsilon).exp();
    let (h, c1, c2) = pair_coefficients(d, i, j, zeta, exp_neg_eps);
    let denom = exp_neg_eps * (alpha[j] - alpha[i]);
    Ok(CriticalPoints {
        h,
        c1,
        c2,
        e1: c2 / denom,
        e2: c1 / denom,
        i,
        j,
    })
}

/// Gradient `(dF/dA1, dF/dA2)` at `(a1, a2)`, both inside the support.
///
/// Uses the closed form valid when `a1` lies in bin `i` and `a2` in bin `j`;
/// at bin boundaries the density height is taken from the right-closed bin
/// convention, matching [`StepDensity::pdf_at`].
pub fn gradient_f(
    d: &StepDensity,
    a1: f64,
    a2: f64,
    zeta: f64,
    epsilon: f64,
) -> Result<(f64, f64)> {
    check_zeta_epsilon(zeta, epsilon)?;
    if !(a1 <= a2) {
        return Err(Error::ReversedBounds { lo: a1, hi: a2 });
    }
    let (lo, hi) = d.support();
    let i = d
        .bin_index(a1)
        .ok_or(Error::OutOfInterval { y: a1, a1: lo, a2: hi })?;
    let j = d
        .bin_index(a2)
        .ok_or(Error::OutOfInterval { y: a2, a1: lo, a2: hi })?;
    let exp_neg_eps = (-epsilon).exp();
    let alpha = d.heights();
    // with a1 and a2 in the same bin the telescoped h collapses to zero
    let (_, c1, c2) = if i == j {
        (0.0, 2.0 * zeta * alpha[i], 2.0 * zeta * alpha[j])
    } else {
        pair_coefficients(d, i, j, zeta, exp_neg_eps)
    };
    let gamma = 2.0 * zeta + exp_neg_eps * (a2 - a1);
    let g2 = gamma * gamma;
    let cross = exp_neg_eps * (alpha[i] - alpha[j]);
    let d_a1 = -2.0 * zeta / g2 * (cross * a2 + c1);
    let d_a2 = 2.0 * zeta / g2 * (cross * a1 + c2);
    Ok((d_a1, d_a2))
}

struct Search<'a> {
    d: &'a StepDensity,
    zeta: f64,
    exp_neg_eps: f64,
    best_f: f64,
    best: (f64, f64),
    evaluations: u64,
}

impl Search<'_> {
    /// Evaluates a candidate and keeps it if it wins. Ties prefer the longer
    /// interval, then the smaller left endpoint, so results are deterministic.
    fn consider(&mut self, a1: f64, a2: f64) {
        if !(a1 <= a2) {
            return;
        }
        self.evaluations += 1;
        let f = f_value(self.d, a1, a2, self.zeta, self.exp_neg_eps);
        let better = f > self.best_f
            || (f == self.best_f
                && (a2 - a1 > self.best.1 - self.best.0
                    || (a2 - a1 == self.best.1 - self.best.0 && a1 < self.best.0)));
        if better {
            self.best_f = f;
            self.best = (a1, a2);
        }
    }
}

/// Maximizes `F` over all intervals.
///
/// The maximizer always lies inside the prior's support: `F` is increasing
/// in `A1` left of the support and decreasing in `A2` right of it, so the
/// search enumerates, for every bin pair `i <= j`, the four corner
/// combinations plus the critical coordinates `e1`/`e2` where they fall
/// strictly inside their bins. Candidates with `a1 > a2` (possible when
/// `i == j`) are skipped.
pub fn optimal_interval(d: &StepDensity, zeta: f64, epsilon: f64) -> Result<OptimizationResult> {
    check_zeta_epsilon(zeta, epsilon)?;
    let n = d.nodes();
    let k = d.bins();
    let mut s = Search {
        d,
        zeta,
        exp_neg_eps: (-epsilon).exp(),
        best_f: f64::NEG_INFINITY,
        best: (n[0], n[0]),
        evaluations: 0,
    };
    for i in 0..k {
        for j in i..k {
            s.consider(n[i], n[j]);
            s.consider(n[i], n[j + 1]);
            s.consider(n[i + 1], n[j]);
            s.consider(n[i + 1], n[j + 1]);
            let cp = match critical_points(d, i, j, zeta, epsilon) {
                Ok(cp) => cp,
                Err(_) => continue,
            };
            let e1_inside = n[i] < cp.e1 && cp.e1 < n[i + 1];
            let e2_inside = n[j] < cp.e2 && cp.e2 < n[j + 1];
            if e2_inside {
                s.consider(n[i], cp.e2);
                s.consider(n[i + 1], cp.e2);
            }
            if e1_inside {
                s.consider(cp.e1, n[j]);
                s.consider(cp.e1, n[j + 1]);
            }
            if e1_inside && e2_inside {
                s.consider(cp.e1, cp.e2);
            }
        }
    }
    Ok(OptimizationResult {
        interval: Interval {
            a1: s.best.0,
            a2: s.best.1,
        },
        objective: s.best_f,
        evaluations: s.evaluations,
    })
}
