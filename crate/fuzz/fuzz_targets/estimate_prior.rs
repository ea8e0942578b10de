//! Prior estimation on adversarial labels and parameters: must either error
//! cleanly or produce a plan satisfying its documented invariants.

#![no_main]

use arbitrary::Arbitrary;
use labeldp::additive::AdditiveNoiseSpec;
use labeldp::prior::{estimate_prior, SigmaPolicy};
use labeldp::seeding::make_rng;
use labeldp::step_density::NORMALIZATION_TOL;
use libfuzzer_sys::fuzz_target;

#[derive(Arbitrary, Debug)]
struct Input {
    labels: Vec<f64>,
    epsilon1: f64,
    sensitivity: f64,
    fixed_sigma: Option<f64>,
    seed: u64,
}

fuzz_target!(|input: Input| {
    let Ok(noise) = AdditiveNoiseSpec::laplace(input.epsilon1, input.sensitivity, None) else {
        return;
    };
    let sigma_policy = match input.fixed_sigma {
        Some(s) => SigmaPolicy::Fixed(s),
        None => SigmaPolicy::StdOfRandomized,
    };
    let mut rng = make_rng(input.seed);
    let Ok((density, plan)) = estimate_prior(
        &input.labels,
        input.epsilon1,
        &noise,
        sigma_policy,
        &mut rng,
    ) else {
        return;
    };

    assert_eq!(plan.n(), input.labels.len() as u64);
    assert_eq!(plan.nodes.len(), plan.bin_counts.len() + 1);
    assert!(plan.nodes.windows(2).all(|w| w[0] < w[1]));
    let (lo, hi) = density.support();
    let total = density.integrate(lo, hi).unwrap();
    assert!((total - 1.0).abs() <= NORMALIZATION_TOL, "mass {total}");

    if !plan.degenerate {
        let min = plan.nodes[0];
        let max = *plan.nodes.last().unwrap();
        assert!(plan.mu + plan.k0 as f64 * plan.sigma <= min);
        assert!(min < plan.mu + (plan.k0 + 1) as f64 * plan.sigma);
        assert!(plan.mu + plan.k1 as f64 * plan.sigma < max);
        assert!(max <= plan.mu + (plan.k1 + 1) as f64 * plan.sigma);
    }
});
