//! Inverse-derivative densities by monotone rearrangement, the horizontal and
//! vertical shift estimates, and the diagnostic point set.
//!
//! For a convex curve with derivative `m'`, `f = ((m')⁻¹)'` is estimated by a
//! kernel density of the values `m̂'(i/N)`, `i = 1..N`; its distribution
//! function estimates `(m')⁻¹` itself. Under the null hypothesis the two
//! densities agree on `[m_1'(0), m_1'(1-c)]`.

use crate::error::{invalid, Error, Result};
use crate::kernels::{Kernel, KernelSpec};
use crate::quadrature::trapezoid;
use crate::scalar::{linspace, Scalar};
use crate::smoothing::CurveEstimate;

pub const DEFAULT_ETA: f64 = 0.01;
pub const DEFAULT_DEVICE_POINTS: usize = 1000;
pub const DEFAULT_CDF_NODES: usize = 2000;
pub const DEFAULT_SHIFT_GRID: usize = 2000;

/// Rule-of-thumb density bandwidth `n^{-1/3}`.
pub fn default_density_bandwidth<T: Scalar>(n: usize) -> T {
    T::lit((n as f64).powf(-1.0 / 3.0))
}

/// `f̂(t) = (N h)⁻¹ Σ_i K_d((m̂'(i/N) − t)/h)`.
#[derive(Debug, Clone)]
pub struct DensityEstimate<T> {
    values: Vec<T>,
    sorted: Vec<T>,
    bandwidth: T,
    kernel: Kernel,
    source: CurveEstimate<T>,
}

impl<T: Scalar> DensityEstimate<T> {
    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn bandwidth(&self) -> T {
        self.bandwidth
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    /// The curve whose derivative generated the atoms.
    pub fn source(&self) -> &CurveEstimate<T> {
        &self.source
    }

    /// `m̂'(i/N)` for `i = 1..N`, in index order.
    pub fn atoms(&self) -> &[T] {
        &self.values
    }

    pub fn evaluate(&self, t: T) -> T {
        let h = self.bandwidth;
        let lo = self.sorted.partition_point(|&v| v < t - h);
        let hi = self.sorted.partition_point(|&v| v <= t + h);
        let s: T = self.sorted[lo..hi].iter().map(|&v| self.kernel.value((v - t) / h)).sum();
        s / (T::from_count(self.values.len()) * h)
    }

    /// Closed interval outside of which the density vanishes.
    pub fn support(&self) -> (T, T) {
        let first = self.sorted[0];
        let last = self.sorted[self.sorted.len() - 1];
        (first - self.bandwidth, last + self.bandwidth)
    }
}

/// Builds the rearrangement density of `curve`'s derivative on `N` atoms.
pub fn rearrangement_density<T: Scalar>(
    curve: &CurveEstimate<T>,
    grid_size: usize,
    bandwidth: T,
    spec: &KernelSpec<T>,
) -> Result<DensityEstimate<T>> {
    let nf = T::from_count(grid_size);
    let values: Vec<T> = (1..=grid_size).map(|i| curve.derivative(T::from_count(i) / nf)).collect();
    density_from_atoms(values, bandwidth, spec.density_kernel(), curve.clone())
}

pub(crate) fn density_from_atoms<T: Scalar>(
    values: Vec<T>,
    bandwidth: T,
    kernel: Kernel,
    source: CurveEstimate<T>,
) -> Result<DensityEstimate<T>> {
    if values.len() < 50 {
        return Err(invalid(format!("density grid size N = {} must be at least 50", values.len())));
    }
    if !(bandwidth > T::zero()) || !bandwidth.is_finite() {
        return Err(invalid(format!("density bandwidth {bandwidth} must be positive")));
    }
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite derivative estimates"));
    Ok(DensityEstimate { values, sorted, bandwidth, kernel, source })
}

/// Trapezoid integral of `density` from `lower` to `x` on `grid` intervals.
pub fn integrate_density<T: Scalar>(density: &DensityEstimate<T>, lower: T, x: T, grid: usize) -> Result<T> {
    if x < lower {
        return Err(invalid("integration bounds must satisfy lower <= x"));
    }
    if grid < 100 {
        return Err(invalid("integration grid must have at least 100 intervals"));
    }
    Ok(trapezoid(|t| density.evaluate(t), lower, x, grid))
}

/// Cached distribution function of a rearrangement density: `ĝ(x) = ∫_{-∞}^x f̂`,
/// tabulated on a dense grid over the support and interpolated linearly.
/// Arguments outside the support are clamped to its endpoints.
#[derive(Debug, Clone)]
pub struct InverseDerivative<T> {
    lo: T,
    step: T,
    cumulative: Vec<T>,
}

impl<T: Scalar> InverseDerivative<T> {
    pub fn new(density: &DensityEstimate<T>, nodes: usize) -> Self {
        let nodes = nodes.max(2);
        let (lo, hi) = density.support();
        let xs = linspace(lo, hi, nodes);
        let step = (hi - lo) / T::from_count(nodes - 1);
        let mut cumulative = Vec::with_capacity(nodes);
        let mut acc = T::zero();
        let mut prev = density.evaluate(xs[0]);
        cumulative.push(acc);
        for &x in &xs[1..] {
            let f = density.evaluate(x);
            acc = acc + (prev + f) * T::lit(0.5) * step;
            cumulative.push(acc);
            prev = f;
        }
        InverseDerivative { lo, step, cumulative }
    }

    pub fn value(&self, x: T) -> T {
        let last = self.cumulative.len() - 1;
        let pos = (x - self.lo) / self.step;
        if !(pos > T::zero()) {
            return self.cumulative[0];
        }
        if pos >= T::from_count(last) {
            return self.cumulative[last];
        }
        let k = pos.floor().to_usize().unwrap_or(0).min(last - 1);
        let frac = pos - T::from_count(k);
        self.cumulative[k] + (self.cumulative[k + 1] - self.cumulative[k]) * frac
    }

    /// Total mass captured by the table.
    pub fn total(&self) -> T {
        self.cumulative[self.cumulative.len() - 1]
    }
}

/// Estimated horizontal shift `c`, vertical shift `d` and the comparison window.
///
/// All quantities refer to the ordering in which the shift is positive; when
/// `swapped` is set, "first" is the second input sample. The `signed_*`
/// accessors translate back to the caller's ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftEstimate<T> {
    pub c_prelim: T,
    pub c_hat: T,
    pub d_hat: T,
    pub a_hat: T,
    pub b_hat: T,
    pub swapped: bool,
    pub eta: T,
}

impl<T: Scalar> ShiftEstimate<T> {
    /// `[â + η, b̂ − η]`.
    pub fn window(&self) -> (T, T) {
        (self.a_hat + self.eta, self.b_hat - self.eta)
    }

    /// Horizontal shift in the caller's ordering: `m_1(t) = m_2(t + c) + d`.
    pub fn signed_c(&self) -> T {
        if self.swapped { -self.c_hat } else { self.c_hat }
    }

    /// Vertical shift in the caller's ordering.
    pub fn signed_d(&self) -> T {
        if self.swapped { -self.d_hat } else { self.d_hat }
    }

    /// `(first, second)` in the shift's ordering.
    pub fn order<'a, X>(&self, one: &'a X, two: &'a X) -> (&'a X, &'a X) {
        if self.swapped { (two, one) } else { (one, two) }
    }
}

fn check_window<T: Scalar>(a_hat: T, b_hat: T, eta: T) -> Result<()> {
    if !(b_hat - a_hat > eta + eta) {
        return Err(Error::DegenerateWindow { a_hat: a_hat.as_f64(), b_hat: b_hat.as_f64(), eta: eta.as_f64() });
    }
    Ok(())
}

/// Estimates `(c, d)` and the window `[â + η, b̂ − η]` from the two rearrangement densities.
///
/// The orientation is decided first: `∫_{m̂_2'(0)}^{m̂_1'(0)} f̂_2` negative means
/// the first curve lags the second, and the roles are exchanged. In the chosen
/// ordering `c̃ = ĝ_2(m̂_1'(0))` and `ĉ` averages `ĝ_2(m̂_1'(u)) − u` over
/// `u ∈ [0, 1 − c̃]` by the trapezoid rule on `grid` intervals.
pub fn estimate_shift<T: Scalar>(
    dens1: &DensityEstimate<T>,
    dens2: &DensityEstimate<T>,
    eta: T,
    grid: usize,
) -> Result<ShiftEstimate<T>> {
    estimate_shift_with(dens1, dens2, eta, grid, DEFAULT_CDF_NODES)
}

pub fn estimate_shift_with<T: Scalar>(
    dens1: &DensityEstimate<T>,
    dens2: &DensityEstimate<T>,
    eta: T,
    grid: usize,
    cdf_nodes: usize,
) -> Result<ShiftEstimate<T>> {
    if !(eta > T::zero()) {
        return Err(invalid(format!("eta = {eta} must be positive")));
    }
    if grid < 2 {
        return Err(invalid("shift integration grid must have at least 2 intervals"));
    }
    let zero = T::zero();
    let g2 = InverseDerivative::new(dens2, cdf_nodes);
    let start1 = dens1.source().derivative(zero);
    let start2 = dens2.source().derivative(zero);
    let orientation = g2.value(start1) - g2.value(start2);
    let swapped = orientation < zero;
    let (first, g) = if swapped { (dens2, InverseDerivative::new(dens1, cdf_nodes)) } else { (dens1, g2) };
    let second = if swapped { dens1 } else { dens2 };
    let curve1 = first.source();
    let curve2 = second.source();

    let a_hat = curve1.derivative(zero);
    let c_prelim = g.value(a_hat);
    if !(c_prelim < T::one()) {
        return Err(Error::ShiftOutOfRange { c_hat: c_prelim.as_f64() });
    }
    let upper = T::one() - c_prelim;
    let c_hat = trapezoid(|u| g.value(curve1.derivative(u)) - u, zero, upper, grid) / upper;
    if !c_hat.is_finite() || !(c_hat < T::one()) || !(c_hat > -T::one()) {
        return Err(Error::ShiftOutOfRange { c_hat: c_hat.as_f64() });
    }
    let d_hat = curve1.level(zero) - curve2.level(c_hat);
    let b_hat = curve1.derivative((T::one() - c_hat).min(T::one()).max(zero));
    check_window(a_hat, b_hat, eta)?;
    Ok(ShiftEstimate { c_prelim, c_hat, d_hat, a_hat, b_hat, swapped, eta })
}

/// Points `(t_ℓ, f̂_1(t_ℓ) − f̂_2(t_ℓ))` on `L` equally spaced nodes of the window.
#[derive(Debug, Clone, PartialEq)]
pub struct DevicePointSet<T> {
    pub points: Vec<(T, T)>,
}

impl<T: Scalar> DevicePointSet<T> {
    pub fn max_abs_difference(&self) -> T {
        self.points.iter().fold(T::zero(), |m, &(_, d)| m.max(d.abs()))
    }

    pub fn mean_abs_difference(&self) -> T {
        let s: T = self.points.iter().map(|&(_, d)| d.abs()).sum();
        s / T::from_count(self.points.len().max(1))
    }
}

/// Diagnostic point set; `dens1`, `dens2` are in the caller's ordering and the
/// differences are taken in the shift's ordering.
pub fn device_point_set<T: Scalar>(
    dens1: &DensityEstimate<T>,
    dens2: &DensityEstimate<T>,
    shift: &ShiftEstimate<T>,
    points: usize,
) -> Result<DevicePointSet<T>> {
    if points < 2 {
        return Err(invalid("the point set needs at least 2 points"));
    }
    check_window(shift.a_hat, shift.b_hat, shift.eta)?;
    let (first, second) = shift.order(dens1, dens2);
    let (lo, hi) = shift.window();
    let points = linspace(lo, hi, points)
        .into_iter()
        .map(|t| (t, first.evaluate(t) - second.evaluate(t)))
        .collect();
    Ok(DevicePointSet { points })
}
