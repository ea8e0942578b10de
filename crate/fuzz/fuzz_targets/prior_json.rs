//! Any JSON that parses into a `StepDensity` must satisfy the construction
//! invariants: sorted nodes, unit mass, lossless re-serialization.

#![no_main]

use labeldp::step_density::{StepDensity, NORMALIZATION_TOL};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(d) = serde_json::from_str::<StepDensity>(text) else {
        return;
    };

    let (lo, hi) = d.support();
    assert!(lo < hi);
    assert!(d.nodes().windows(2).all(|w| w[0] < w[1]));
    let total = d.integrate(lo, hi).unwrap();
    assert!((total - 1.0).abs() <= NORMALIZATION_TOL, "mass {total}");
    let mid = lo + 0.5 * (hi - lo);
    assert!(d.pdf_at(mid).is_finite());
    assert_eq!(d.pdf_at(f64::NAN), 0.0);

    // restriction to the middle half keeps the invariants (skipped cleanly
    // when the window arithmetic overflows)
    if let Ok(r) = d.restrict(lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)) {
        let (rlo, rhi) = r.support();
        assert!((r.integrate(rlo, rhi).unwrap() - 1.0).abs() <= NORMALIZATION_TOL);
    }

    let json = serde_json::to_string(&d).unwrap();
    let back: StepDensity = serde_json::from_str(&json).unwrap();
    assert_eq!(back, d);
});
