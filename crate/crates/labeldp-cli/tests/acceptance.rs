//! The benchmark-direction criterion: at small budgets the interval
//! randomizer must beat the Laplace baseline on a fixed-seed linear task,
//! and the infinite-budget rows must collapse onto the no-noise baseline.

use labeldp_cli::bench::{run_bench, synthetic_task, BenchRow, BenchSettings};

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = std::time::Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

#[test]
fn a09_benchmark_direction() {
    let ((), secs) = timed(|| {
        let seed = 909;
        let task = synthetic_task(20_000, 30, seed);
        let settings = BenchSettings {
            epsilons: vec![0.1, 0.5, f64::INFINITY],
            trials: 10,
            zeta: 0.2,
            split_fraction: 0.5,
            lambda: 1e-4,
            seed,
        };
        let rows = run_bench(&task, &settings).unwrap();
        let find = |mech: &str, eps: f64| -> &BenchRow {
            rows.iter()
                .find(|r| r.mechanism == mech && r.epsilon == eps)
                .unwrap_or_else(|| panic!("missing row {mech} at {eps}"))
        };

        for eps in [0.1, 0.5] {
            let rp = find("rp_with_prior", eps);
            let lap = find("laplace", eps);
            assert!(
                rp.mean_mse < lap.mean_mse,
                "eps {eps}: rp_with_prior {} not below laplace {}",
                rp.mean_mse,
                lap.mean_mse
            );
        }

        let none = find("none", f64::INFINITY);
        assert!(none.std_mse > 0.0, "baseline trials degenerate");
        for mech in ["laplace", "gaussian", "rp_with_prior"] {
            let row = find(mech, f64::INFINITY);
            assert!(
                (row.mean_mse - none.mean_mse).abs() <= 2.0 * none.std_mse,
                "{mech} at inf: {} vs baseline {} (2 std = {})",
                row.mean_mse,
                none.mean_mse,
                2.0 * none.std_mse
            );
        }
    });
    println!("A9 benchmark direction at n=2e4 over 10 trials: PASS ({secs:.2} s)");
}
