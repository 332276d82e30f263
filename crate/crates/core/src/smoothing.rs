//! Local-linear estimation of a regression function and its derivative on the
//! uniform design `i/n`, with the boundary extension used throughout the crate
//! and a GCV bandwidth selector.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::{Kernel, KernelSpec};
use crate::scalar::{linspace, Scalar};

/// Shape of the regression function. Concave data are negated on ingestion so
/// that every estimator downstream works with a convex curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    #[default]
    Convex,
    Concave,
}

impl Orientation {
    /// `+1` for convex, `-1` for concave: multiplies responses into the convex frame.
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Orientation::Convex => T::one(),
            Orientation::Concave => -T::one(),
        }
    }
}

impl std::str::FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "convex" => Ok(Orientation::Convex),
            "concave" => Ok(Orientation::Concave),
            other => Err(format!("unknown orientation {other:?} (expected convex | concave)")),
        }
    }
}

pub const MIN_SAMPLE_SIZE: usize = 10;

/// One observed series `y_1..y_n` on the design points `i/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    responses: Arc<[T]>,
    orientation: Orientation,
}

impl<T: Scalar> Sample<T> {
    /// Builds a sample from responses in their original units; concave samples are negated.
    pub fn new(responses: Vec<T>, orientation: Orientation) -> Result<Self> {
        if responses.len() < MIN_SAMPLE_SIZE {
            return Err(Error::TooFewRows("sample".into(), responses.len()));
        }
        if let Some(i) = responses.iter().position(|y| !y.is_finite()) {
            return Err(invalid(format!("response {} is not finite", i + 1)));
        }
        let sign = orientation.sign::<T>();
        Ok(Sample {
            responses: responses.into_iter().map(|y| y * sign).collect(),
            orientation,
        })
    }

    /// Convex sample; shorthand used by generators and tests.
    pub fn convex(responses: Vec<T>) -> Result<Self> {
        Self::new(responses, Orientation::Convex)
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    /// Responses in the convex frame.
    pub fn responses(&self) -> &[T] {
        &self.responses
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Design point of the `i`-th observation, `i` counted from 1.
    #[inline]
    pub fn design_point(&self, i: usize) -> T {
        T::from_count(i) / T::from_count(self.len())
    }
}

const RIDGE: f64 = 1e-10;
const MAX_CONDITION: f64 = 1e12;

/// Local-linear estimate of `m` and `m'` with bandwidth `b`.
///
/// Evaluation is lazy. For `t ∈ [b, 1-b]` the level and slope come from the
/// kernel-weighted least-squares line centred at `t`; outside that interval the
/// derivative is frozen at its value at the nearest of `b`, `1-b` and the level
/// follows the local line fitted there.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveEstimate<T> {
    responses: Arc<[T]>,
    bandwidth: T,
    kernel: Kernel,
}

#[derive(Debug, Clone, Copy)]
struct LocalFit<T> {
    level: T,
    derivative: T,
    condition: T,
}

impl<T: Scalar> CurveEstimate<T> {
    pub fn bandwidth(&self) -> T {
        self.bandwidth
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    fn local_fit(&self, t: T) -> LocalFit<T> {
        let n = self.responses.len();
        let nf = T::from_count(n);
        let b = self.bandwidth;
        let lo = ((t - b) * nf).ceil().max(T::one()).to_usize().unwrap_or(1);
        let hi = ((t + b) * nf).floor().to_usize().unwrap_or(0).min(n);
        let (mut s0, mut s1, mut s2, mut r0, mut r1) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
        for i in lo..=hi {
            let u = (T::from_count(i) / nf - t) / b;
            let w = self.kernel.value(u);
            if w <= T::zero() {
                continue;
            }
            let y = self.responses[i - 1];
            s0 = s0 + w;
            s1 = s1 + w * u;
            s2 = s2 + w * u * u;
            r0 = r0 + w * y;
            r1 = r1 + w * u * y;
        }
        let det = s0 * s2 - s1 * s1;
        let trace = s0 + s2;
        let condition = if det <= T::zero() || trace <= T::zero() {
            T::infinity()
        } else {
            let disc = ((s0 - s2) * (s0 - s2) + T::lit(4.0) * s1 * s1).sqrt();
            let (big, small) = ((trace + disc) * T::lit(0.5), (trace - disc) * T::lit(0.5));
            if small <= T::zero() { T::infinity() } else { big / small }
        };
        let ridge = T::lit(RIDGE) * trace;
        let (a, c) = (s0 + ridge, s2 + ridge);
        let det_r = a * c - s1 * s1;
        let (level, slope) = if det_r > T::zero() {
            let solve = |p: T, q: T| ((c * p - s1 * q) / det_r, (a * q - s1 * p) / det_r);
            // one refinement step against the unridged matrix removes the ridge bias
            let (l0, k0) = solve(r0, r1);
            let (dl, dk) = solve(r0 - s0 * l0 - s1 * k0, r1 - s1 * l0 - s2 * k0);
            (l0 + dl, k0 + dk)
        } else if s0 > T::zero() {
            (r0 / s0, T::zero())
        } else {
            (T::zero(), T::zero())
        };
        LocalFit { level, derivative: slope / b, condition }
    }

    fn clamp_to_interior(&self, t: T) -> T {
        let b = self.bandwidth;
        t.max(b).min(T::one() - b)
    }

    /// `(m̂(t), m̂'(t))` with the boundary extension applied.
    pub fn evaluate(&self, t: T) -> (T, T) {
        let anchor = self.clamp_to_interior(t);
        let fit = self.local_fit(anchor);
        (fit.level + fit.derivative * (t - anchor), fit.derivative)
    }

    pub fn level(&self, t: T) -> T {
        self.evaluate(t).0
    }

    pub fn derivative(&self, t: T) -> T {
        self.local_fit(self.clamp_to_interior(t)).derivative
    }
}

fn check_bandwidth<T: Scalar>(n: usize, bandwidth: T) -> Result<()> {
    let lower = T::one() / T::from_count(n);
    if !(bandwidth > lower && bandwidth < T::lit(0.5)) {
        return Err(invalid(format!(
            "bandwidth {bandwidth} must lie in (1/n, 0.5) = ({lower}, 0.5)"
        )));
    }
    Ok(())
}

/// Fits the local-linear estimator, rejecting bandwidths for which some local
/// normal matrix on `[b, 1-b]` has condition number above 1e12.
pub fn fit_local_linear<T: Scalar>(sample: &Sample<T>, bandwidth: T, spec: &KernelSpec<T>) -> Result<CurveEstimate<T>> {
    let n = sample.len();
    check_bandwidth(n, bandwidth)?;
    let curve = CurveEstimate {
        responses: sample.responses.clone(),
        bandwidth,
        kernel: spec.base_kernel(),
    };
    // The set of design points carrying positive weight only changes at
    // half-grid offsets, so probing every multiple of 1/(2n) covers all windows.
    let nf = T::from_count(2 * n);
    let probes = (0..=2 * n)
        .map(|k| T::from_count(k) / nf)
        .filter(|&t| t >= bandwidth && t <= T::one() - bandwidth)
        .chain([bandwidth, T::one() - bandwidth]);
    for t in probes {
        let fit = curve.local_fit(t);
        if !(fit.condition <= T::lit(MAX_CONDITION)) {
            return Err(Error::SingularDesign { t: t.as_f64(), bandwidth: bandwidth.as_f64() });
        }
    }
    Ok(curve)
}

/// `12` log-spaced bandwidths in `[0.5·n^{-1/5}, 2·n^{-1/5}]`, dropping values
/// outside the admissible range `(1/n, 0.5)`.
pub fn default_gcv_grid<T: Scalar>(n: usize) -> Vec<T> {
    let base = (n as f64).powf(-0.2);
    log_grid(0.5 * base, 2.0 * base, 12)
        .into_iter()
        .filter(|&b| b > 1.0 / n as f64 && b < 0.5)
        .map(T::lit)
        .collect()
}

/// `count` logarithmically spaced values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), count).into_iter().map(f64::exp).collect()
}

/// Generalised cross-validation score `n⁻¹ Σ (Y_i − m̂(i/n))² / (1 − K(0)/(nb))²`.
pub fn gcv_score<T: Scalar>(sample: &Sample<T>, curve: &CurveEstimate<T>, spec: &KernelSpec<T>) -> T {
    let n = sample.len();
    let nf = T::from_count(n);
    let rss: T = sample
        .responses()
        .iter()
        .enumerate()
        .map(|(k, &y)| {
            let r = y - curve.level(sample.design_point(k + 1));
            r * r
        })
        .sum();
    let denom = T::one() - spec.base(T::zero()) / (nf * curve.bandwidth());
    rss / nf / (denom * denom)
}

/// Candidate minimising the GCV score. Scores equal up to rounding are resolved
/// toward the smaller bandwidth; singular candidates are skipped.
pub fn gcv_bandwidth<T: Scalar>(sample: &Sample<T>, spec: &KernelSpec<T>, grid: &[T]) -> Result<T> {
    if grid.is_empty() {
        return Err(invalid("GCV grid is empty"));
    }
    let n = T::from_count(sample.len());
    let scale = sample.responses().iter().map(|&y| y * y).sum::<T>() / n;
    let tol = T::lit(1e-12) * scale.max(T::min_positive_value());
    let mut best: Option<(T, T)> = None;
    for &b in grid {
        let curve = match fit_local_linear(sample, b, spec) {
            Ok(c) => c,
            Err(Error::SingularDesign { .. }) => continue,
            Err(e) => return Err(e),
        };
        let score = gcv_score(sample, &curve, spec);
        best = match best {
            None => Some((b, score)),
            Some((bb, bs)) => {
                if score < bs - tol || ((score - bs).abs() <= tol && b < bb) {
                    Some((b, score))
                } else {
                    Some((bb, bs))
                }
            }
        };
    }
    best.map(|(b, _)| b).ok_or(Error::AllCandidatesSingular)
}
