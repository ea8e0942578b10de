//! Shared helpers for the integration suite. Oracles here re-derive
//! quantities from first principles (prefix sums, midpoint evaluation,
//! direct counting) instead of calling the library's own integration or
//! search routines, so they can catch systematic errors rather than echo
//! them.

use labeldp::mechanism::RandomizerSpec;
use labeldp::step_density::StepDensity;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// RNG wrapper that counts 64-bit words drawn from the source.
pub struct CountingRng {
    inner: ChaCha20Rng,
    pub calls: u64,
}

impl CountingRng {
    pub fn seed(seed: u64) -> Self {
        Self {
            inner: ChaCha20Rng::seed_from_u64(seed),
            calls: 0,
        }
    }
}

impl RngCore for CountingRng {
    fn next_u32(&mut self) -> u32 {
        self.calls += 1;
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.calls += 1;
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.calls += 1;
        self.inner.fill_bytes(dest);
    }
}

/// Inverse-CDF sampler over a step density with the cumulative table built
/// once; zero-mass bins get zero probability.
pub struct PriorSampler {
    nodes: Vec<f64>,
    cum: Vec<f64>,
}

impl PriorSampler {
    pub fn new(d: &StepDensity) -> Self {
        let nodes = d.nodes().to_vec();
        let heights = d.heights();
        let mut cum = Vec::with_capacity(heights.len() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for (i, h) in heights.iter().enumerate() {
            acc += h * (nodes[i + 1] - nodes[i]);
            cum.push(acc);
        }
        Self { nodes, cum }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let bins = self.cum.len() - 1;
        let total = *self.cum.last().unwrap();
        let u = rng.random::<f64>() * total;
        let b = self.cum.partition_point(|&c| c <= u).min(bins) - 1;
        let w = self.cum[b + 1] - self.cum[b];
        if w <= 0.0 {
            return self.nodes[b];
        }
        let frac = (u - self.cum[b]) / w;
        self.nodes[b] + frac * (self.nodes[b + 1] - self.nodes[b])
    }
}

pub fn sample_step_density<R: Rng + ?Sized>(d: &StepDensity, rng: &mut R) -> f64 {
    PriorSampler::new(d).sample(rng)
}

/// A random step prior with up to `max_bins` bins over a sub-range of
/// [0, 2.5]; occasionally contains zero-mass bins.
pub fn random_density(rng: &mut ChaCha20Rng, max_bins: usize) -> StepDensity {
    loop {
        let k = rng.random_range(1..=max_bins);
        let lo = rng.random::<f64>() * 0.5;
        let mut nodes = vec![lo];
        for _ in 0..k {
            let step = 0.01 + rng.random::<f64>() * (1.5 / k as f64);
            nodes.push(nodes.last().unwrap() + step);
        }
        let mut heights: Vec<f64> = (0..k)
            .map(|_| {
                if rng.random::<f64>() < 0.2 {
                    0.0
                } else {
                    0.05 + rng.random::<f64>()
                }
            })
            .collect();
        if heights.iter().all(|&h| h == 0.0) {
            heights[0] = 1.0;
        }
        if let Ok(d) = StepDensity::from_heights(nodes, heights) {
            return d;
        }
    }
}

/// Brute-force maximization of F over a grid of endpoints (absolute step
/// `res`, plus all nodes), with the integral done by independent prefix
/// sums. O(1) per candidate pair.
pub fn grid_max_f(d: &StepDensity, zeta: f64, epsilon: f64, res: f64) -> f64 {
    let nodes = d.nodes();
    let heights = d.heights();
    let (lo, hi) = (nodes[0], *nodes.last().unwrap());
    let steps = ((hi - lo) / res).ceil() as usize;
    let mut pts: Vec<f64> = (0..=steps).map(|t| lo + t as f64 * res).collect();
    pts.extend_from_slice(nodes);
    pts.retain(|p| *p <= hi);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    // cdf[i] = prior mass of [lo, pts[i]]
    let mut cdf = Vec::with_capacity(pts.len());
    let mut bin = 0usize;
    let mut acc = 0.0;
    let mut prev = lo;
    for &p in &pts {
        while bin + 1 < heights.len() && p > nodes[bin + 1] {
            acc += heights[bin] * (nodes[bin + 1] - prev);
            prev = nodes[bin + 1];
            bin += 1;
        }
        cdf.push(acc + heights[bin] * (p - prev));
    }

    let exp_neg_eps = (-epsilon).exp();
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in i..pts.len() {
            let f = 2.0 * zeta * (cdf[j] - cdf[i])
                / (2.0 * zeta + exp_neg_eps * (pts[j] - pts[i]));
            if f > best {
                best = f;
            }
        }
    }
    best
}

/// Breakpoints of the conditional density of `spec` given `y`, clipped to
/// the support.
pub fn density_breakpoints(spec: &RandomizerSpec, y: f64) -> Vec<f64> {
    let (lo, hi) = spec.support();
    let c = y.clamp(spec.a1(), spec.a2());
    let mut cuts = vec![lo, hi];
    for b in [c - spec.zeta(), c + spec.zeta()] {
        if b > lo && b < hi {
            cuts.push(b);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts
}

/// Exact mass of the conditional density, evaluated at segment midpoints.
pub fn conditional_mass(spec: &RandomizerSpec, y: f64) -> f64 {
    let cuts = density_breakpoints(spec, y);
    cuts.windows(2)
        .map(|w| spec.conditional_density(y, 0.5 * (w[0] + w[1])) * (w[1] - w[0]))
        .sum()
}

/// Splits the support into `bins` cells aligned with the density
/// breakpoints for `y`, returning the cell edges.
pub fn aligned_bins(spec: &RandomizerSpec, y: f64, bins: usize) -> Vec<f64> {
    let cuts = density_breakpoints(spec, y);
    let lens: Vec<f64> = cuts.windows(2).map(|w| w[1] - w[0]).collect();
    let total: f64 = lens.iter().sum();
    let mut alloc: Vec<usize> = lens
        .iter()
        .map(|l| ((bins as f64 * l / total).floor() as usize).max(1))
        .collect();
    while alloc.iter().sum::<usize>() < bins {
        let i = (0..alloc.len())
            .max_by(|&a, &b| (lens[a] / alloc[a] as f64).total_cmp(&(lens[b] / alloc[b] as f64)))
            .unwrap();
        alloc[i] += 1;
    }
    let mut edges = Vec::new();
    for (seg, &parts) in alloc.iter().enumerate() {
        for p in 0..parts {
            edges.push(cuts[seg] + (cuts[seg + 1] - cuts[seg]) * p as f64 / parts as f64);
        }
    }
    edges.push(*cuts.last().unwrap());
    edges
}

/// Upper critical value of the chi-square distribution.
pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(df as f64)
        .unwrap()
        .inverse_cdf(1.0 - alpha)
}

/// Stopwatch helper for the per-criterion runtime lines.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = std::time::Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}
