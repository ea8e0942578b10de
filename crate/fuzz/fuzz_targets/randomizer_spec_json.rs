//! Any JSON that parses into a `RandomizerSpec` must honor its own budget
//! and evaluate to a sane density everywhere.

#![no_main]

use labeldp::audit::analytic_audit;
use labeldp::mechanism::RandomizerSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = serde_json::from_str::<RandomizerSpec>(text) else {
        return;
    };

    assert!(spec.gamma() > 0.0 && spec.gamma().is_finite());
    let (lo, hi) = spec.support();
    assert!(lo < hi && lo.is_finite() && hi.is_finite());

    // the DP certificate must hold for every constructible spec
    let report = analytic_audit(&spec);
    assert!(
        report.pass_analytic,
        "ratio {} over budget {}",
        report.analytic_max_ratio,
        spec.epsilon()
    );

    let mid = lo + 0.5 * (hi - lo);
    for y in [lo, mid, hi, lo - 1.0, hi + 1.0] {
        for x in [lo, mid, hi] {
            let f = spec.conditional_density(y, x);
            assert!(f >= 0.0 && f.is_finite(), "density({y}, {x}) = {f}");
        }
        // beyond the support the density vanishes (when the probe point is
        // actually representable beyond it)
        if hi + 1.0 > hi {
            assert_eq!(spec.conditional_density(y, hi + 1.0), 0.0);
        }
    }
});
