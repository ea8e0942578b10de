//! Privacy certification for the interval randomizer.
//!
//! Label DP demands that every output density ratio between two labels stays
//! within `exp(epsilon)`. For the randomizer this is checkable in closed
//! form: every conditional density is piecewise constant taking at most
//! three values, `1/gamma`, `exp(-epsilon)/gamma` and (uniform-outside
//! policy) `1/(2 zeta + a2 - a1)`, so the worst ratio is a max over a handful
//! of level pairs. [`analytic_audit`] does exactly that. [`empirical_audit`]
//! re-derives the same bound from samples alone, with Wilson-interval slack,
//! so a broken sampler cannot hide behind the analytic argument.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::{PolicyKind, RandomizerSpec};

/// Relative slack on the analytic ratio comparison; pure float headroom.
pub const ANALYTIC_TOL: f64 = 1e-12;

/// Normal quantile for the empirical audit's confidence bounds
/// (two-sided 0.001).
pub const WILSON_Z: f64 = 3.2905267314919255;

/// Minimum empirical samples per histogram bin (per label, per pair).
pub const MIN_SAMPLES_PER_BIN: u64 = 10_000;

/// Outcome of an audit; analytic fields are always present, empirical ones
/// only when sampling ran.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub epsilon_claimed: f64,
    /// Exact worst-case density ratio the mechanism can exhibit.
    pub analytic_max_ratio: f64,
    pub pass_analytic: bool,
    pub policy: PolicyKind,
    pub samples_used: u64,
    /// Largest lower confidence bound on a log density ratio observed across
    /// all pairs, bins and directions. A value above `epsilon_claimed` is a
    /// certified violation, not sampling noise.
    pub empirical_max_log_ratio: Option<f64>,
    pub pass_empirical: Option<bool>,
}

impl AuditReport {
    pub fn pass(&self) -> bool {
        self.pass_analytic && self.pass_empirical.unwrap_or(true)
    }
}

/// Certifies the spec against its own epsilon.
pub fn analytic_audit(r: &RandomizerSpec) -> AuditReport {
    analytic_audit_against(r, r.epsilon())
}

/// Certifies the spec against an externally claimed epsilon.
///
/// The worst ratio is assembled from algebraically simplified level pairs
/// (e.g. the in/out pair is `exp(epsilon)` directly) so the comparison is
/// exact up to [`ANALYTIC_TOL`] even at large budgets.
pub fn analytic_audit_against(r: &RandomizerSpec, epsilon_claimed: f64) -> AuditReport {
    let width = r.a2() - r.a1();
    let mut worst = 1.0f64;
    if width > 0.0 {
        // in-level over out-level
        worst = worst.max(r.epsilon().exp());
    }
    if r.policy() == PolicyKind::UniformOutside {
        let flat = 2.0 * r.zeta() + width;
        // in-level over flat level
        worst = worst.max(flat / r.gamma());
        if width > 0.0 {
            // flat level over out-level
            worst = worst.max(r.gamma() * r.epsilon().exp() / flat);
        }
    }
    AuditReport {
        epsilon_claimed,
        analytic_max_ratio: worst,
        pass_analytic: worst <= epsilon_claimed.exp() * (1.0 + ANALYTIC_TOL),
        policy: r.policy(),
        samples_used: 0,
        empirical_max_log_ratio: None,
        pass_empirical: None,
    }
}

/// Label pairs that exercise the extreme ratios: the two interval endpoints
/// (maximally separated neighborhoods), midpoint against an endpoint, and an
/// out-of-interval label to engage the policy path.
pub fn default_pairs(r: &RandomizerSpec) -> Vec<(f64, f64)> {
    let mid = 0.5 * (r.a1() + r.a2());
    vec![
        (r.a1(), r.a2()),
        (mid, r.a1()),
        (r.a1() - r.zeta() - 1.0, r.a2()),
    ]
}

fn wilson_bounds(count: u64, n: u64) -> (f64, f64) {
    let nf = n as f64;
    let z = WILSON_Z;
    let p = count as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let center = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Bin edges over the support, aligned with every density breakpoint of the
/// pair so no bin straddles a discontinuity; segments are then subdivided
/// proportionally to length until (at least) `bins` bins exist.
fn pair_partition(r: &RandomizerSpec, y: f64, y2: f64, bins: usize) -> Vec<f64> {
    let (lo, hi) = r.support();
    let mut cuts = vec![lo, hi];
    for label in [y, y2] {
        let c = label.clamp(r.a1(), r.a2());
        for b in [c - r.zeta(), c + r.zeta()] {
            if b > lo && b < hi {
                cuts.push(b);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let lens: Vec<f64> = cuts.windows(2).map(|w| w[1] - w[0]).collect();
    let total: f64 = lens.iter().sum();
    let mut alloc: Vec<usize> = lens
        .iter()
        .map(|l| ((bins as f64 * l / total).floor() as usize).max(1))
        .collect();
    while alloc.iter().sum::<usize>() < bins {
        // widen the partition where current sub-bins are widest
        let i = (0..alloc.len())
            .max_by(|&a, &b| {
                (lens[a] / alloc[a] as f64).total_cmp(&(lens[b] / alloc[b] as f64))
            })
            .unwrap();
        alloc[i] += 1;
    }

    let mut edges = Vec::with_capacity(alloc.iter().sum::<usize>() + 1);
    for (seg, &parts) in alloc.iter().enumerate() {
        let (u, v) = (cuts[seg], cuts[seg + 1]);
        for p in 0..parts {
            edges.push(u + (v - u) * p as f64 / parts as f64);
        }
    }
    edges.push(hi);
    edges
}

fn histogram<R: Rng + ?Sized, S: FnMut(f64, &mut R) -> f64>(
    edges: &[f64],
    y: f64,
    n: u64,
    rng: &mut R,
    sampler: &mut S,
) -> Vec<u64> {
    let mut counts = vec![0u64; edges.len() - 1];
    for _ in 0..n {
        let x = sampler(y, rng);
        let idx = edges.partition_point(|e| *e <= x);
        let last = counts.len() - 1;
        counts[idx.saturating_sub(1).min(last)] += 1;
    }
    counts
}

/// Samples the spec's own randomizer and audits against its own epsilon.
pub fn empirical_audit<R: Rng + ?Sized>(
    r: &RandomizerSpec,
    pairs: &[(f64, f64)],
    n_samples: u64,
    bins: usize,
    rng: &mut R,
) -> Result<AuditReport> {
    let spec = *r;
    empirical_audit_with_sampler(r, r.epsilon(), pairs, n_samples, bins, rng, move |y, rng| {
        spec.sample(y, rng)
    })
}

/// Empirical audit with an arbitrary sampler standing in for the mechanism.
///
/// This is the hook for auditing a sampler implementation against the
/// density it claims to follow (including deliberately broken ones in
/// tests). For each pair, `n_samples` outputs per label are histogrammed on
/// a shared breakpoint-aligned partition; a violation is declared only when
/// the Wilson lower bound of one cell beats the Wilson upper bound of its
/// counterpart by more than `exp(epsilon_claimed)`.
pub fn empirical_audit_with_sampler<R: Rng + ?Sized, S: FnMut(f64, &mut R) -> f64>(
    r: &RandomizerSpec,
    epsilon_claimed: f64,
    pairs: &[(f64, f64)],
    n_samples: u64,
    bins: usize,
    rng: &mut R,
    mut sampler: S,
) -> Result<AuditReport> {
    let needed = MIN_SAMPLES_PER_BIN * bins as u64;
    if n_samples < needed {
        return Err(Error::InsufficientSamples {
            needed,
            bins,
            got: n_samples,
        });
    }
    let mut max_log_ratio: Option<f64> = None;
    let mut samples_used = 0u64;
    for &(y, y2) in pairs {
        let edges = pair_partition(r, y, y2, bins);
        let counts1 = histogram(&edges, y, n_samples, rng, &mut sampler);
        let counts2 = histogram(&edges, y2, n_samples, rng, &mut sampler);
        samples_used += 2 * n_samples;
        for (c1, c2) in counts1.iter().zip(&counts2) {
            for (a, b) in [(c1, c2), (c2, c1)] {
                let (lo_a, _) = wilson_bounds(*a, n_samples);
                let (_, hi_b) = wilson_bounds(*b, n_samples);
                if lo_a > 0.0 {
                    let lr = (lo_a / hi_b).ln();
                    if max_log_ratio.is_none_or(|m| lr > m) {
                        max_log_ratio = Some(lr);
                    }
                }
            }
        }
    }
    let mut report = analytic_audit_against(r, epsilon_claimed);
    report.samples_used = samples_used;
    report.empirical_max_log_ratio = max_log_ratio;
    report.pass_empirical = Some(max_log_ratio.is_none_or(|m| m <= epsilon_claimed));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn spec(policy: PolicyKind) -> RandomizerSpec {
        RandomizerSpec::new(0.0, 1.0, 0.1, 1.0, policy).unwrap()
    }

    #[test]
    fn analytic_projection_ratio_is_exp_epsilon() {
        let report = analytic_audit(&spec(PolicyKind::Projection));
        assert_eq!(report.analytic_max_ratio, 1.0f64.exp());
        assert!(report.pass_analytic);
        assert!(report.pass());
        assert!(report.empirical_max_log_ratio.is_none());
    }

    #[test]
    fn analytic_uniform_outside_still_passes() {
        let report = analytic_audit(&spec(PolicyKind::UniformOutside));
        assert!(report.analytic_max_ratio <= 1.0f64.exp() * (1.0 + ANALYTIC_TOL));
        assert!(report.pass_analytic);
    }

    #[test]
    fn analytic_epsilon_zero_ratio_is_one() {
        let r = RandomizerSpec::new(-3.0, 8.0, 0.5, 0.0, PolicyKind::Projection).unwrap();
        let report = analytic_audit(&r);
        assert_eq!(report.analytic_max_ratio, 1.0);
        assert!(report.pass_analytic);
    }

    #[test]
    fn analytic_degenerate_interval_ratio_is_one() {
        for policy in [PolicyKind::Projection, PolicyKind::UniformOutside] {
            let r = RandomizerSpec::new(2.0, 2.0, 0.7, 4.0, policy).unwrap();
            assert_eq!(analytic_audit(&r).analytic_max_ratio, 1.0);
        }
    }

    #[test]
    fn analytic_catches_overclaimed_budget() {
        let r = spec(PolicyKind::Projection);
        let report = analytic_audit_against(&r, 0.5);
        assert!(!report.pass_analytic);
        assert_eq!(report.epsilon_claimed, 0.5);
        assert!(report.analytic_max_ratio > 0.5f64.exp());
        assert!(!report.pass());
    }

    #[test]
    fn wilson_bounds_frozen() {
        let (lo, hi) = wilson_bounds(50, 100);
        assert_relative_eq!(lo, 0.34371707547475705, max_relative = 1e-12);
        assert_relative_eq!(hi, 0.656282924525243, max_relative = 1e-12);
        let (lo, hi) = wilson_bounds(0, 100);
        assert_eq!(lo, 0.0);
        assert_relative_eq!(hi, 0.09769740999265117, max_relative = 1e-12);
        let (lo, hi) = wilson_bounds(100, 100);
        assert_relative_eq!(lo, 0.9023025900073488, max_relative = 1e-12);
        assert!(hi <= 1.0);
        let (lo, hi) = wilson_bounds(3, 1000);
        assert_relative_eq!(lo, 0.0005532212740181983, max_relative = 1e-12);
        assert_relative_eq!(hi, 0.016094094978358182, max_relative = 1e-12);
    }

    #[test]
    fn partition_aligns_with_breakpoints_and_counts() {
        let r = spec(PolicyKind::Projection);
        let edges = pair_partition(&r, 0.0, 1.0, 20);
        assert!(edges.len() >= 21);
        assert!(edges.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(edges[0], -0.1);
        assert_eq!(*edges.last().unwrap(), 1.1);
        // breakpoints of both conditional densities appear among the edges
        for b in [0.1, 0.9] {
            assert!(edges.iter().any(|e| (e - b).abs() < 1e-12), "missing {b}");
        }
    }

    #[test]
    fn insufficient_samples_is_an_error() {
        let r = spec(PolicyKind::Projection);
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert!(matches!(
            empirical_audit(&r, &default_pairs(&r), 1_000, 20, &mut rng),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn empirical_agrees_with_analytic_on_valid_specs() {
        for (policy, seed) in [(PolicyKind::Projection, 1u64), (PolicyKind::UniformOutside, 2)] {
            let r = spec(policy);
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let report =
                empirical_audit(&r, &default_pairs(&r), 200_000, 20, &mut rng).unwrap();
            assert!(report.pass_analytic);
            assert_eq!(report.pass_empirical, Some(true));
            assert!(report.pass());
            assert_eq!(report.samples_used, 3 * 2 * 200_000);
            let stat = report.empirical_max_log_ratio.unwrap();
            assert!(stat <= 1.0, "certified log ratio {stat} beats epsilon");
        }
    }

    #[test]
    fn identical_labels_show_no_ratio() {
        let r = spec(PolicyKind::Projection);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let report = empirical_audit(&r, &[(0.5, 0.5)], 200_000, 20, &mut rng).unwrap();
        let stat = report.empirical_max_log_ratio.unwrap();
        assert!(stat.abs() < 0.1, "stat {stat}");
        assert_eq!(report.pass_empirical, Some(true));
    }

    #[test]
    fn planted_violation_is_detected() {
        let r = spec(PolicyKind::Projection);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        // a sampler that never leaves the neighborhood: far more peaked than
        // the claimed two-level density
        let report = empirical_audit_with_sampler(
            &r,
            r.epsilon(),
            &[(0.0, 1.0)],
            200_000,
            20,
            &mut rng,
            |y, rng| {
                let c = y.clamp(0.0, 1.0);
                c - 0.1 + 0.2 * rng.random::<f64>()
            },
        )
        .unwrap();
        assert_eq!(report.pass_empirical, Some(false));
        assert!(report.empirical_max_log_ratio.unwrap() > 1.0);
        assert!(!report.pass());
    }

    #[test]
    fn report_serializes() {
        let r = spec(PolicyKind::Projection);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let report = empirical_audit(&r, &[(0.2, 0.8)], 200_000, 10, &mut rng).unwrap();
        let back: AuditReport =
            serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        assert_eq!(back, report);
    }
}
