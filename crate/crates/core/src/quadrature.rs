//! Composite trapezoid rules used by every integral in the crate.

use crate::scalar::Scalar;

/// Composite trapezoid rule on `intervals` equal sub-intervals of `[a, b]`.
pub fn trapezoid<T: Scalar>(f: impl Fn(T) -> T, a: T, b: T, intervals: usize) -> T {
    let intervals = intervals.max(1);
    if b == a {
        return T::zero();
    }
    let h = (b - a) / T::from_count(intervals);
    let mut acc = (f(a) + f(b)) * T::lit(0.5);
    for k in 1..intervals {
        acc = acc + f(a + h * T::from_count(k));
    }
    acc * h
}

/// Trapezoid rule over precomputed equally spaced samples.
pub fn trapezoid_samples<T: Scalar>(values: &[T], step: T) -> T {
    match values.len() {
        0 | 1 => T::zero(),
        n => {
            let inner: T = values[1..n - 1].iter().copied().sum();
            (inner + (values[0] + values[n - 1]) * T::lit(0.5)) * step
        }
    }
}

/// Trapezoid sums on `intervals`, `2·intervals` and `4·intervals` nodes combined by
/// Richardson extrapolation (two Romberg columns). Exact for polynomials of degree ≤ 5.
pub fn refined_trapezoid<T: Scalar>(f: impl Fn(T) -> T, a: T, b: T, intervals: usize) -> T {
    let t1 = trapezoid(&f, a, b, intervals);
    let t2 = trapezoid(&f, a, b, 2 * intervals);
    let t4 = trapezoid(&f, a, b, 4 * intervals);
    let four = T::lit(4.0);
    let s1 = (four * t2 - t1) / T::lit(3.0);
    let s2 = (four * t4 - t2) / T::lit(3.0);
    (T::lit(16.0) * s2 - s1) / T::lit(15.0)
}
