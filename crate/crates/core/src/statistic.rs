//! The L² statistic `T = ∫ (f̂_1 − f̂_2)² ŵ`, and quadrature of the asymptotic
//! bias `B_n(g)` and variance `V_T` for the plug-in test.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Error, Result};
use crate::kernels::KernelSpec;
use crate::quadrature::{refined_trapezoid, trapezoid_samples};
use crate::scalar::{linspace, Scalar};
use crate::shift::{DensityEstimate, ShiftEstimate};

pub const DEFAULT_STATISTIC_NODES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestStatistic<T> {
    pub value: T,
    pub window: (T, T),
    pub grid_size: usize,
}

/// Trapezoid quadrature of `(f̂_1 − f̂_2)²` on `M` nodes of the estimated window.
pub fn test_statistic<T: Scalar>(
    dens1: &DensityEstimate<T>,
    dens2: &DensityEstimate<T>,
    shift: &ShiftEstimate<T>,
    nodes: usize,
) -> Result<TestStatistic<T>> {
    if !(shift.b_hat - shift.a_hat > shift.eta + shift.eta) {
        return Err(Error::DegenerateWindow {
            a_hat: shift.a_hat.as_f64(),
            b_hat: shift.b_hat.as_f64(),
            eta: shift.eta.as_f64(),
        });
    }
    let (lo, hi) = shift.window();
    statistic_on_window(dens1, dens2, lo, hi, nodes)
}

/// Same integral over a fixed window, e.g. the deterministic `w` when `a`, `b` are known.
pub fn statistic_on_window<T: Scalar>(
    dens1: &DensityEstimate<T>,
    dens2: &DensityEstimate<T>,
    lo: T,
    hi: T,
    nodes: usize,
) -> Result<TestStatistic<T>> {
    if nodes < 100 {
        return Err(invalid(format!("statistic grid M = {nodes} must be at least 100")));
    }
    if !(hi > lo) {
        return Err(invalid("statistic window must be non-empty"));
    }
    let values: Vec<T> = linspace(lo, hi, nodes)
        .into_iter()
        .map(|t| {
            let d = dens1.evaluate(t) - dens2.evaluate(t);
            d * d
        })
        .collect();
    let step = (hi - lo) / T::from_count(nodes - 1);
    Ok(TestStatistic { value: trapezoid_samples(&values, step), window: (lo, hi), grid_size: nodes })
}

/// Population quantities describing one sample for the bias/variance formulas.
pub struct AsymptoticSide<'a, T> {
    /// Long-run variance `σ²(u)`.
    pub sigma2: &'a dyn Fn(T) -> T,
    /// `m'(u)`.
    pub derivative: &'a dyn Fn(T) -> T,
    /// `m''(u)`.
    pub second_derivative: &'a dyn Fn(T) -> T,
    pub n: usize,
    pub bandwidth: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticQuantities<T> {
    /// `B_n(g)`; equals `B_n(0)` unless a local alternative was supplied.
    pub bias: T,
    /// `B_n(0)`.
    pub bias0: T,
    pub variance: T,
    /// `∫ σ_s² w(m_s') (m_s'')⁻³ du` per sample.
    pub curvature_integrals: [T; 2],
    /// `n_1 b_1^{9/2}`, the scaling of `T` in the limit theorem.
    pub scale: T,
}

const NONCONVEX_LIMIT: f64 = 1e-6;

/// `{u ∈ [0,1] : lo ≤ m'(u) ≤ hi}` as a union of intervals, located by scanning
/// `quad` cells and bisecting every crossing.
fn preimage<T: Scalar>(derivative: &dyn Fn(T) -> T, lo: T, hi: T, quad: usize) -> Vec<(T, T)> {
    let inside = |u: T| {
        let v = derivative(u);
        v >= lo && v <= hi
    };
    let bisect = |mut a: T, mut b: T| {
        let state = inside(a);
        for _ in 0..80 {
            let mid = (a + b) * T::lit(0.5);
            if inside(mid) == state { a = mid } else { b = mid }
        }
        (a + b) * T::lit(0.5)
    };
    let nodes = linspace(T::zero(), T::one(), quad + 1);
    let mut out = Vec::new();
    let mut start = inside(nodes[0]).then_some(nodes[0]);
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        match (inside(a), inside(b)) {
            (false, true) => start = Some(bisect(a, b)),
            (true, false) => {
                let end = bisect(a, b);
                if let Some(s) = start.take() {
                    out.push((s, end));
                }
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, T::one()));
    }
    out
}

/// `∫_0^1 σ²(u) w(m'(u)) (m''(u))^{power}... ` with `w` the indicator of `[lo, hi]`,
/// returning `(∫ σ² w (m'')⁻³, ∫ (σ² w (m'')⁻³)²)`.
pub fn curvature_integrals<T: Scalar>(side: &AsymptoticSide<'_, T>, lo: T, hi: T, quad: usize) -> Result<(T, T)> {
    let mut first = T::zero();
    let mut second = T::zero();
    for (a, b) in preimage(side.derivative, lo, hi, quad) {
        if !(b > a) {
            continue;
        }
        for u in linspace(a, b, quad + 1) {
            let mpp = (side.second_derivative)(u);
            if !(mpp > T::lit(NONCONVEX_LIMIT)) {
                return Err(Error::NonConvex { u: u.as_f64(), value: mpp.as_f64() });
            }
        }
        let integrand = |u: T| {
            let mpp = (side.second_derivative)(u);
            (side.sigma2)(u) / (mpp * mpp * mpp)
        };
        first = first + refined_trapezoid(integrand, a, b, quad);
        second = second + refined_trapezoid(|u| integrand(u) * integrand(u), a, b, quad);
    }
    Ok((first, second))
}

/// Bias and variance of `n_1 b_1^{9/2} T` for the window `w = 1[lo, hi]`.
///
/// `c_2 = n_2/n_1` and `r_2 = b_1/b_2` (both 1 for the first sample); with equal
/// sizes and bandwidths this is the equal-sample form. The optional local
/// alternative `g` adds `∫ g² w`.
pub fn asymptotic_quantities<T: Scalar>(
    sides: [&AsymptoticSide<'_, T>; 2],
    window: (T, T),
    spec: &KernelSpec<T>,
    quad: usize,
    local_alternative: Option<&dyn Fn(T) -> T>,
) -> Result<AsymptoticQuantities<T>> {
    if quad < 256 {
        return Err(invalid(format!("quadrature size {quad} must be at least 256")));
    }
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(invalid("asymptotic window must be non-empty"));
    }
    let k = spec.constants();
    let n1 = T::from_count(sides[0].n);
    let b1 = sides[0].bandwidth;
    let mut bias0 = T::zero();
    let mut variance = T::zero();
    let mut integrals = [T::zero(); 2];
    for (s, side) in sides.iter().enumerate() {
        let c = T::from_count(side.n) / n1;
        let r = b1 / side.bandwidth;
        let (first, second) = curvature_integrals(side, lo, hi, quad)?;
        integrals[s] = first;
        bias0 = bias0 + c * r.powi(5) * first;
        variance = variance + c * c * r.powi(9) * second;
    }
    let slope = k.density_slope_moment;
    bias0 = bias0 * slope * slope * k.kprime_convolution_at_zero / b1.sqrt();
    variance = variance * T::lit(2.0) * slope.powi(4) * k.kprime_convolution_sq_integral;
    let bias = match local_alternative {
        Some(g) => bias0 + refined_trapezoid(|t| g(t) * g(t), lo, hi, quad),
        None => bias0,
    };
    Ok(AsymptoticQuantities {
        bias,
        bias0,
        variance,
        curvature_integrals: integrals,
        scale: n1 * b1.powf(T::lit(4.5)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticDecision<T> {
    pub threshold: T,
    pub reject: bool,
}

/// Plug-in normal test: reject when `T > (B_n(0) + z_{1−α} V_T^{1/2}) / (n b^{9/2})`.
///
/// Experimental; the bias is of order `b^{-1/2}` and the approximation is poor
/// at moderate sample sizes, where the bootstrap test should be preferred.
pub fn asymptotic_test<T: Scalar>(
    statistic: &TestStatistic<T>,
    quantities: &AsymptoticQuantities<T>,
    n: usize,
    bandwidth: T,
    alpha: T,
) -> Result<AsymptoticDecision<T>> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(invalid(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let z = Normal::standard().inverse_cdf(1.0 - alpha.as_f64());
    let z = if (alpha.as_f64() - 0.5).abs() < 1e-15 { 0.0 } else { z };
    let scale = T::from_count(n) * bandwidth.powf(T::lit(4.5));
    let threshold = (quantities.bias0 + T::lit(z) * quantities.variance.max(T::zero()).sqrt()) / scale;
    Ok(AsymptoticDecision { threshold, reject: statistic.value > threshold })
}
