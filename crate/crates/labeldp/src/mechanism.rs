//! The interval randomizer: a two-level conditional density on
//! `[a1 - zeta, a2 + zeta]`.
//!
//! Given an interval `[a1, a2]` and budget `epsilon`, a label `y` inside the
//! interval is replaced by a draw whose density is `1/gamma` on the
//! neighborhood `[y - zeta, y + zeta]` and `exp(-epsilon)/gamma` on the rest
//! of the support, with `gamma = 2 zeta + exp(-epsilon) (a2 - a1)`. The two
//! levels differ by exactly `exp(epsilon)`, which is the whole privacy
//! argument. Labels outside the interval are handled by a
//! [`PolicyKind`]: project onto the interval (default; the neighborhood hugs
//! the nearest endpoint) or answer uniformly on the support.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::Interval;

/// What to do with labels outside the randomization interval.
///
/// Both choices keep every output density between the two in-range levels,
/// so neither costs any privacy (see [`crate::audit`]).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Clamp the label to the interval, then randomize as if it were inside.
    #[default]
    Projection,
    /// Ignore the label and answer uniformly on the whole support.
    UniformOutside,
}

/// Immutable parameters of one randomizer.
///
/// JSON form: `{"a1":..,"a2":..,"zeta":..,"epsilon":..,"policy":"projection"}`;
/// `gamma` is derived and recomputed on parse, so a deserialized spec is
/// always internally consistent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRandomizerSpec")]
pub struct RandomizerSpec {
    a1: f64,
    a2: f64,
    zeta: f64,
    epsilon: f64,
    policy: PolicyKind,
    #[serde(skip)]
    gamma: f64,
}

#[derive(Deserialize)]
struct RawRandomizerSpec {
    a1: f64,
    a2: f64,
    zeta: f64,
    epsilon: f64,
    #[serde(default)]
    policy: PolicyKind,
}

impl TryFrom<RawRandomizerSpec> for RandomizerSpec {
    type Error = Error;

    fn try_from(raw: RawRandomizerSpec) -> Result<Self> {
        RandomizerSpec::new(raw.a1, raw.a2, raw.zeta, raw.epsilon, raw.policy)
    }
}

impl RandomizerSpec {
    pub fn new(a1: f64, a2: f64, zeta: f64, epsilon: f64, policy: PolicyKind) -> Result<Self> {
        let interval = Interval::new(a1, a2)?;
        if !(zeta > 0.0) || !zeta.is_finite() {
            return Err(Error::NonPositiveZeta { zeta });
        }
        if epsilon.is_nan() || epsilon < 0.0 {
            return Err(Error::NegativeEpsilon { epsilon });
        }
        // near-MAX endpoints can overflow the support arithmetic; gamma is
        // bounded by the support width, so checking the support covers both
        let (lo, hi) = (a1 - zeta, a2 + zeta);
        if !lo.is_finite() || !hi.is_finite() || !(hi - lo).is_finite() {
            return Err(Error::NonFiniteValue {
                what: "randomizer support",
            });
        }
        let gamma = 2.0 * zeta + (-epsilon).exp() * interval.width();
        Ok(Self {
            a1,
            a2,
            zeta,
            epsilon,
            policy,
            gamma,
        })
    }

    pub fn from_interval(interval: Interval, zeta: f64, epsilon: f64, policy: PolicyKind) -> Result<Self> {
        Self::new(interval.a1, interval.a2, zeta, epsilon, policy)
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn interval(&self) -> Interval {
        Interval {
            a1: self.a1,
            a2: self.a2,
        }
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Normalizer `2 zeta + exp(-epsilon) (a2 - a1)`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn policy(&self) -> PolicyKind {
        self.policy
    }

    /// Support of every output: `[a1 - zeta, a2 + zeta]`.
    pub fn support(&self) -> (f64, f64) {
        (self.a1 - self.zeta, self.a2 + self.zeta)
    }

    /// Probability that an in-interval label stays within `zeta` of itself:
    /// `2 zeta / gamma`.
    pub fn neighborhood_mass(&self, y: f64) -> Result<f64> {
        if !(y >= self.a1 && y <= self.a2) {
            return Err(Error::OutOfInterval {
                y,
                a1: self.a1,
                a2: self.a2,
            });
        }
        Ok(2.0 * self.zeta / self.gamma)
    }

    /// Density of the output at `y_tilde` given true label `y`.
    ///
    /// Neighborhood membership is the closed condition `|y_tilde - c| <= zeta`
    /// (a measure-zero choice, fixed for deterministic tests).
    pub fn conditional_density(&self, y: f64, y_tilde: f64) -> f64 {
        if y.is_nan() || y_tilde.is_nan() {
            return 0.0;
        }
        let (lo, hi) = self.support();
        if y_tilde < lo || y_tilde > hi {
            return 0.0;
        }
        if self.policy == PolicyKind::UniformOutside && (y < self.a1 || y > self.a2) {
            return 1.0 / (2.0 * self.zeta + (self.a2 - self.a1));
        }
        let center = y.clamp(self.a1, self.a2);
        if (y_tilde - center).abs() <= self.zeta {
            1.0 / self.gamma
        } else {
            (-self.epsilon).exp() / self.gamma
        }
    }

    /// Draws one randomized label.
    ///
    /// Consumes exactly two uniforms on the two-level path and one on the
    /// uniform-outside path; callers that account for randomness (replay,
    /// budget audits) rely on that. The complement of the neighborhood is
    /// sampled segment-proportionally, which realizes the constant low level
    /// without rejection.
    pub fn sample<R: Rng + ?Sized>(&self, y: f64, rng: &mut R) -> f64 {
        let (lo, hi) = self.support();
        if self.policy == PolicyKind::UniformOutside && !(y >= self.a1 && y <= self.a2) {
            let u: f64 = rng.random();
            return (lo + u * (hi - lo)).clamp(lo, hi);
        }
        let center = y.clamp(self.a1, self.a2);
        let p_in = 2.0 * self.zeta / self.gamma;
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let out = if u1 < p_in {
            center - self.zeta + u2 * 2.0 * self.zeta
        } else {
            // complement splits into [lo, center - zeta) and (center + zeta, hi]
            // of lengths (center - a1) and (a2 - center); total a2 - a1
            let left = center - self.a1;
            let t = u2 * (self.a2 - self.a1);
            if t < left {
                lo + t
            } else {
                center + self.zeta + (t - left)
            }
        };
        // rounding guard: containment in the support is a hard invariant
        out.clamp(lo, hi)
    }
}
