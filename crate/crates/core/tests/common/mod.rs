#![allow(dead_code)]

use std::path::PathBuf;

use curveshift::simulation::{Model, RegressionFunction};
use curveshift::{AnalysisConfig, Orientation, Sample};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// `m(i/n)` without noise.
pub fn noiseless(f: &RegressionFunction, n: usize) -> Sample {
    Sample::new(f.design_values(n), Orientation::Convex).unwrap()
}

pub fn noiseless_pair(model: Model, n: usize) -> [Sample; 2] {
    let p = model.pair();
    [noiseless(&p.first, n), noiseless(&p.second, n)]
}

pub fn sample_from(n: usize, f: impl Fn(f64) -> f64) -> Sample {
    Sample::convex((1..=n).map(|i| f(i as f64 / n as f64)).collect()).unwrap()
}

/// Density of `m'(U)` for `U ~ Unif[0, 1]`: `Σ 1/|m''(u)|` over the solutions of
/// `m'(u) = t`, found by scanning and bisection. For monotone `m'` this is
/// `((m')⁻¹)'(t)`.
pub fn true_inverse_density(f: &RegressionFunction, t: f64) -> f64 {
    const CELLS: usize = 2000;
    let g = |u: f64| (f.first)(u) - t;
    let mut total = 0.0;
    for k in 0..CELLS {
        let (mut a, mut b) = (k as f64 / CELLS as f64, (k + 1) as f64 / CELLS as f64);
        let (ga, gb) = (g(a), g(b));
        if ga == 0.0 && k > 0 {
            continue;
        }
        if ga * gb > 0.0 {
            continue;
        }
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if (g(mid) > 0.0) == (ga > 0.0) { a = mid } else { b = mid }
        }
        total += 1.0 / (f.second)(0.5 * (a + b)).abs();
    }
    total
}

pub fn epanechnikov(x: f64) -> f64 {
    if x.abs() < 1.0 { 0.75 * (1.0 - x * x) } else { 0.0 }
}

/// Local-linear level and slope at `t` by explicit normal equations in `x − t`,
/// with the boundary rule applied.
pub fn brute_force_fit(y: &[f64], b: f64, t: f64) -> (f64, f64) {
    let n = y.len();
    let anchor = t.clamp(b, 1.0 - b);
    let (mut s0, mut s1, mut s2, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, &yk) in y.iter().enumerate() {
        let d = (k + 1) as f64 / n as f64 - anchor;
        let w = epanechnikov(d / b);
        s0 += w;
        s1 += w * d;
        s2 += w * d * d;
        r0 += w * yk;
        r1 += w * d * yk;
    }
    let det = s0 * s2 - s1 * s1;
    let level = (s2 * r0 - s1 * r1) / det;
    let slope = (s0 * r1 - s1 * r0) / det;
    (level + slope * (t - anchor), slope)
}

/// GCV criterion recomputed from scratch.
pub fn brute_force_gcv(y: &[f64], b: f64) -> f64 {
    let n = y.len() as f64;
    let rss: f64 = y
        .iter()
        .enumerate()
        .map(|(k, &yk)| (yk - brute_force_fit(y, b, (k + 1) as f64 / n).0).powi(2))
        .sum();
    rss / n / (1.0 - 0.75 / (n * b)).powi(2)
}

pub fn default_config() -> AnalysisConfig {
    AnalysisConfig::default()
}

/// `m(i/n) + σ ε_i` with i.i.d. standard normal `ε` from a fixed stream.
pub fn noisy(f: &RegressionFunction, n: usize, sigma: f64, seed: u64) -> Sample {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = curveshift::rng::stream_rng(seed, 0x7e57, 0);
    let y = f
        .design_values(n)
        .into_iter()
        .map(|m| {
            let e: f64 = StandardNormal.sample(&mut rng);
            m + sigma * e
        })
        .collect();
    Sample::convex(y).unwrap()
}
