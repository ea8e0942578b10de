//! The acceptance gate: one test per criterion, each printing a single
//! PASS line with its runtime (run with `--nocapture` to see them). The
//! statistical checks use fixed seeds so the whole suite is deterministic.

mod common;

use common::*;
use labeldp::additive::AdditiveNoiseSpec;
use labeldp::audit::analytic_audit;
use labeldp::dataset::LabeledDataset;
use labeldp::mechanism::{PolicyKind, RandomizerSpec};
use labeldp::optimizer::{gradient_f, objective_f, optimal_interval};
use labeldp::pipeline::{expected_mechanism_mse, privatize_dataset, PrivacyBudgetSplit};
use labeldp::prior::{estimate_prior, SigmaPolicy};
use labeldp::seeding::{make_rng, stream_seed, STAGE_PRIOR, STAGE_RANDOMIZE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn random_spec(rng: &mut ChaCha20Rng) -> RandomizerSpec {
    let a1 = -50.0 + 100.0 * rng.random::<f64>();
    let a2 = if rng.random::<f64>() < 0.05 {
        a1
    } else {
        a1 + 30.0 * rng.random::<f64>()
    };
    let zeta = 1e-3 + 10.0 * rng.random::<f64>();
    let epsilon = match rng.random_range(0..10u8) {
        0 => 0.0,
        1 => f64::INFINITY,
        _ => 10.0 * rng.random::<f64>(),
    };
    let policy = if rng.random::<bool>() {
        PolicyKind::Projection
    } else {
        PolicyKind::UniformOutside
    };
    RandomizerSpec::new(a1, a2, zeta, epsilon, policy).unwrap()
}

#[test]
fn a01_analytic_audit_bounds_density_ratio() {
    let ((), secs) = timed(|| {
        let mut rng = ChaCha20Rng::seed_from_u64(101);
        for case in 0..1000 {
            let spec = random_spec(&mut rng);
            let report = analytic_audit(&spec);
            assert!(
                report.analytic_max_ratio <= spec.epsilon().exp() + 1e-12,
                "case {case}: ratio {} exceeds e^eps for {spec:?}",
                report.analytic_max_ratio
            );
            assert!(report.pass_analytic, "case {case}: {spec:?}");
        }
    });
    println!("A1 analytic audit on 1000 fuzzed specs: PASS ({secs:.2} s)");
}

#[test]
fn a02_conditional_density_normalizes() {
    let ((), secs) = timed(|| {
        let mut rng = ChaCha20Rng::seed_from_u64(202);
        for case in 0..100 {
            let spec = random_spec(&mut rng);
            let (lo, hi) = spec.support();
            let span = hi - lo;
            for k in 0..10 {
                // half the probes inside the interval, half projected
                let y = if k % 2 == 0 {
                    spec.a1() + (spec.a2() - spec.a1()) * rng.random::<f64>()
                } else {
                    lo - span - 1.0 + 2.0 * (span + 1.0) * rng.random::<f64>()
                };
                let mass = conditional_mass(&spec, y);
                assert!(
                    (mass - 1.0).abs() <= 1e-9,
                    "case {case} probe {k}: mass {mass} for y {y} under {spec:?}"
                );
            }
        }
    });
    println!("A2 conditional density normalizes (100 specs x 10 labels): PASS ({secs:.2} s)");
}

#[test]
fn a03_optimizer_matches_grid_oracle() {
    let ((), secs) = timed(|| {
        let mut rng = ChaCha20Rng::seed_from_u64(303);
        for case in 0..200 {
            let d = random_density(&mut rng, 8);
            let zeta = 0.02 + 0.5 * rng.random::<f64>();
            let epsilon = 4.0 * rng.random::<f64>();
            let r = optimal_interval(&d, zeta, epsilon).unwrap();
            let oracle = grid_max_f(&d, zeta, epsilon, 1e-3);
            assert!(
                r.objective >= oracle - 1e-6,
                "case {case}: optimizer {} below grid {oracle}",
                r.objective
            );
            assert!(r.objective <= 1.0 + 1e-12);
            let (lo, hi) = d.support();
            assert!(lo <= r.interval.a1 && r.interval.a2 <= hi);
        }
    });
    println!("A3 optimizer vs brute-force grid on 200 priors: PASS ({secs:.2} s)");
}

#[test]
fn a04_gradient_matches_finite_differences() {
    let ((), secs) = timed(|| {
        let mut rng = ChaCha20Rng::seed_from_u64(404);
        let mut checked = 0usize;
        while checked < 500 {
            let d = random_density(&mut rng, 8);
            let zeta = 0.02 + 0.5 * rng.random::<f64>();
            let epsilon = 4.0 * rng.random::<f64>();
            let (lo, hi) = d.support();
            for _ in 0..10 {
                let a1 = lo + (hi - lo) * rng.random::<f64>();
                let a2 = lo + (hi - lo) * rng.random::<f64>();
                let (a1, a2) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
                let clear = |x: f64| d.nodes().iter().all(|n| (x - n).abs() > 1e-4);
                if a2 - a1 < 1e-3 || !clear(a1) || !clear(a2) {
                    continue;
                }
                let (g1, g2) = gradient_f(&d, a1, a2, zeta, epsilon).unwrap();
                let h = 1e-6;
                let fd1 = (objective_f(&d, a1 + h, a2, zeta, epsilon).unwrap()
                    - objective_f(&d, a1 - h, a2, zeta, epsilon).unwrap())
                    / (2.0 * h);
                let fd2 = (objective_f(&d, a1, a2 + h, zeta, epsilon).unwrap()
                    - objective_f(&d, a1, a2 - h, zeta, epsilon).unwrap())
                    / (2.0 * h);
                assert!(
                    (g1 - fd1).abs() <= 1e-4 * g1.abs().max(fd1.abs()) + 1e-9,
                    "dF/dA1 {g1} vs fd {fd1} at ({a1}, {a2})"
                );
                assert!(
                    (g2 - fd2).abs() <= 1e-4 * g2.abs().max(fd2.abs()) + 1e-9,
                    "dF/dA2 {g2} vs fd {fd2} at ({a1}, {a2})"
                );
                checked += 1;
                if checked == 500 {
                    break;
                }
            }
        }
    });
    println!("A4 gradient vs central differences at 500 points: PASS ({secs:.2} s)");
}

#[test]
fn a05_sampler_matches_density() {
    let ((), secs) = timed(|| {
        const N: u64 = 1_000_000;
        const BINS: usize = 50;
        let crit = chi_square_critical(BINS - 1, 0.001);
        let mut rng = ChaCha20Rng::seed_from_u64(505);
        for case in 0..20 {
            let a1 = -2.0 + 4.0 * rng.random::<f64>();
            let a2 = a1 + 0.5 + 3.0 * rng.random::<f64>();
            let zeta = 0.05 + 0.4 * rng.random::<f64>();
            let epsilon = 0.1 + 2.9 * rng.random::<f64>();
            let policy = if case % 2 == 0 {
                PolicyKind::Projection
            } else {
                PolicyKind::UniformOutside
            };
            let spec = RandomizerSpec::new(a1, a2, zeta, epsilon, policy).unwrap();
            // alternate labels inside the interval and well outside it
            let y = match case % 4 {
                0 | 1 => a1 + (a2 - a1) * (0.2 + 0.6 * rng.random::<f64>()),
                2 => a1 - zeta - 1.0,
                _ => a2 + 2.0,
            };

            let edges = aligned_bins(&spec, y, BINS);
            let expected: Vec<f64> = edges
                .windows(2)
                .map(|w| {
                    N as f64 * spec.conditional_density(y, 0.5 * (w[0] + w[1])) * (w[1] - w[0])
                })
                .collect();
            assert!(
                expected.iter().all(|&e| e >= 5.0),
                "case {case}: expected count too small for a chi-square test"
            );

            let mut counts = vec![0u64; edges.len() - 1];
            let mut neighborhood = 0u64;
            let c = y.clamp(a1, a2);
            for _ in 0..N {
                let x = spec.sample(y, &mut rng);
                let idx = edges.partition_point(|e| *e <= x);
                let last = counts.len() - 1;
                counts[idx.saturating_sub(1).min(last)] += 1;
                if (c - zeta..=c + zeta).contains(&x) {
                    neighborhood += 1;
                }
            }

            let stat: f64 = counts
                .iter()
                .zip(&expected)
                .map(|(&o, &e)| {
                    let d = o as f64 - e;
                    d * d / e
                })
                .sum();
            assert!(
                stat <= crit,
                "case {case}: chi-square {stat} > critical {crit} ({spec:?}, y {y})"
            );

            let outside_uniform =
                policy == PolicyKind::UniformOutside && (y < a1 || y > a2);
            let p = if outside_uniform {
                2.0 * zeta / (2.0 * zeta + (a2 - a1))
            } else {
                2.0 * zeta / spec.gamma()
            };
            let sd = (N as f64 * p * (1.0 - p)).sqrt();
            let dev = (neighborhood as f64 - N as f64 * p).abs();
            assert!(
                dev <= 3.0 * sd,
                "case {case}: neighborhood hits {neighborhood} vs {}",
                N as f64 * p
            );
        }
    });
    println!("A5 sampler chi-square + neighborhood rate on 20 specs: PASS ({secs:.2} s)");
}

#[test]
fn a06_histogram_estimator_invariants_and_snapshot() {
    let ((), secs) = timed(|| {
        const N: usize = 100_000;
        // bimodal labels on [0, 1]
        let mut gen = ChaCha20Rng::seed_from_u64(606);
        let labels: Vec<f64> = (0..N)
            .map(|_| {
                let u = gen.random::<f64>();
                if gen.random::<f64>() < 0.7 {
                    0.15 + 0.2 * u
                } else {
                    0.6 + 0.35 * u
                }
            })
            .collect();
        let noise = AdditiveNoiseSpec::laplace(0.5, 1.0, None).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(607);
        let (density, plan) =
            estimate_prior(&labels, 0.5, &noise, SigmaPolicy::StdOfRandomized, &mut rng).unwrap();

        assert!(!plan.degenerate);
        let k0 = plan.k0 as f64;
        let k1 = plan.k1 as f64;
        let min = *plan.nodes.first().unwrap();
        let max = *plan.nodes.last().unwrap();
        assert!(plan.mu + k0 * plan.sigma <= min && min < plan.mu + (k0 + 1.0) * plan.sigma);
        assert!(plan.mu + k1 * plan.sigma < max && max <= plan.mu + (k1 + 1.0) * plan.sigma);
        assert_eq!(plan.nodes.len() as i64, plan.k1 - plan.k0 + 2);
        assert_eq!(plan.bin_counts.iter().sum::<u64>(), N as u64);
        let (lo, hi) = density.support();
        assert!((density.integrate(lo, hi).unwrap() - 1.0).abs() <= 1e-9);

        // fixed-seed regression snapshot
        assert_eq!(plan.k0, -7);
        assert_eq!(plan.k1, 9);
        assert_eq!(plan.bin_counts.len(), 17);
        assert_eq!(plan.mu, 0.4013470020560224);
        assert_eq!(plan.sigma, 2.8337648334845547);
        assert_eq!(plan.nodes[1], -16.601241998851304);
        assert_eq!(plan.bin_counts[0], 7);
    });
    println!("A6 histogram estimator invariants + snapshot at n=1e5: PASS ({secs:.2} s)");
}

#[test]
fn a07_expected_error_matches_monte_carlo() {
    let ((), secs) = timed(|| {
        const N: u64 = 10_000_000;
        let mut rng = ChaCha20Rng::seed_from_u64(707);
        for case in 0..10 {
            let d = random_density(&mut rng, 6);
            let (lo, hi) = d.support();
            let span = hi - lo;
            let mut a1 = lo + 0.4 * span * rng.random::<f64>();
            let mut a2 = hi - 0.4 * span * rng.random::<f64>();
            if a1 > a2 {
                std::mem::swap(&mut a1, &mut a2);
            }
            let zeta = 0.05 + 0.35 * rng.random::<f64>();
            let epsilon = 0.2 + 2.8 * rng.random::<f64>();
            let policy = if case % 2 == 0 {
                PolicyKind::Projection
            } else {
                PolicyKind::UniformOutside
            };
            let spec = RandomizerSpec::new(a1, a2, zeta, epsilon, policy).unwrap();
            let estimate = expected_mechanism_mse(&spec, &d);

            let sampler = PriorSampler::new(&d);
            let (mut sum, mut sumsq) = (0.0f64, 0.0f64);
            for _ in 0..N {
                let y = sampler.sample(&mut rng);
                let x = spec.sample(y, &mut rng);
                let loss = 0.5 * (x - y) * (x - y);
                sum += loss;
                sumsq += loss * loss;
            }
            let mean = sum / N as f64;
            let var = (sumsq / N as f64 - mean * mean).max(0.0);
            let se = (var / N as f64).sqrt();
            assert!(
                (mean - estimate.exact).abs() <= 3.0 * se + 1e-12,
                "case {case}: MC {mean} vs exact {} (se {se}, {spec:?})",
                estimate.exact
            );
            println!(
                "  config {case}: exact {:.6} mc {mean:.6} closed-form {:.6} (reported only)",
                estimate.exact, estimate.closed_form
            );
        }
    });
    println!("A7 expected error vs Monte Carlo on 10 configs: PASS ({secs:.2} s)");
}

#[test]
fn a08_pipeline_composition_and_replay() {
    let ((), secs) = timed(|| {
        const N: usize = 100_000;
        let mut gen = ChaCha20Rng::seed_from_u64(808);
        let labels: Vec<f64> = (0..N).map(|_| gen.random::<f64>().powi(2)).collect();
        let data = LabeledDataset::from_labels(labels.clone())
            .with_label_bounds(0.0, 1.0)
            .unwrap();
        let split = PrivacyBudgetSplit::new(1.0, 0.25).unwrap();
        let seed = 99u64;

        let (out, report) = privatize_dataset(
            &data,
            &split,
            0.1,
            PolicyKind::Projection,
            SigmaPolicy::StdOfRandomized,
            seed,
        )
        .unwrap();

        // support containment
        let (lo, hi) = report.randomizer.support();
        assert!(out.rows.iter().all(|r| lo <= r.label && r.label <= hi));

        // bit-exact replay
        let (out2, report2) = privatize_dataset(
            &data,
            &split,
            0.1,
            PolicyKind::Projection,
            SigmaPolicy::StdOfRandomized,
            seed,
        )
        .unwrap();
        assert_eq!(report2, report);
        for (a, b) in out.rows.iter().zip(&out2.rows) {
            assert_eq!(a.label.to_bits(), b.label.to_bits());
        }

        // stage 1 reconstructs from its dedicated stream: same prior, and
        // exactly one Laplace word per row on the counting RNG
        let noise = AdditiveNoiseSpec::laplace(
            split.epsilon1(),
            1.0,
            Some((0.0, 1.0)),
        )
        .unwrap();
        let mut s1 = CountingRng::seed(stream_seed(seed, STAGE_PRIOR, 0));
        let (prior, plan) = estimate_prior(
            &labels,
            split.epsilon1(),
            &noise,
            SigmaPolicy::StdOfRandomized,
            &mut s1,
        )
        .unwrap();
        assert_eq!(s1.calls, N as u64);
        assert_eq!(plan, report.plan);
        // the report's prior is the estimate conditioned on the public bounds
        let prior = prior.restrict(0.0, 1.0).unwrap();
        for (a, b) in prior.nodes().iter().zip(report.prior.nodes()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in prior.heights().iter().zip(report.prior.heights()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let opt = optimal_interval(&prior, 0.1, split.epsilon2()).unwrap();
        assert_eq!(opt.interval, report.interval);

        // stage 2 reconstructs row by row: one two-level draw (two words)
        // per row from the row's own stream
        for (i, (orig, row)) in labels.iter().zip(&out.rows).enumerate() {
            let mut s2 = CountingRng::seed(stream_seed(seed, STAGE_RANDOMIZE, i as u64));
            let x = report.randomizer.sample(*orig, &mut s2);
            assert_eq!(x.to_bits(), row.label.to_bits(), "row {i}");
            assert_eq!(s2.calls, 2, "row {i}");
        }
    });
    println!("A8 composition, replay and support containment at n=1e5: PASS ({secs:.2} s)");
}
