//! Time-varying long-run variance from differences of adjacent block sums.
//!
//! With `S_{k,r} = Σ_{i=k}^r Y_i` and `Δ_j = (S_{j-m+1,j} − S_{j+1,j+m})/m`,
//! `σ̂²(t) = Σ_j (m Δ_j² / 2) ω(t, j)` where `ω(t, ·)` are `H((j/n − t)/τ)`
//! weights normalised over the indices for which both blocks fit.

use crate::error::{invalid, Error, Result};
use crate::kernels::{Kernel, KernelSpec};
use crate::scalar::Scalar;
use crate::smoothing::Sample;

/// `m = ⌈n^{1/3}⌉`, kept within `[2, n/4]`.
pub fn default_block_size(n: usize) -> usize {
    ((n as f64).cbrt().ceil() as usize).min(n / 4).max(2)
}

/// `τ = n^{-1/5}`, capped at 0.49 so that small samples stay admissible.
pub fn default_lrv_bandwidth<T: Scalar>(n: usize) -> T {
    T::lit((n as f64).powf(-0.2).min(0.49))
}

#[derive(Debug, Clone)]
pub struct LrvEstimate<T> {
    n: usize,
    block_size: usize,
    bandwidth: T,
    kernel: Kernel,
    /// `m Δ_j² / 2` for `j = m..=n-m`.
    scaled_squares: Vec<T>,
}

impl<T: Scalar> LrvEstimate<T> {
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn bandwidth(&self) -> T {
        self.bandwidth
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `σ̂²(t)`; constant on `[0, m/n]` and `[1 − m/n, 1]`.
    pub fn evaluate(&self, t: T) -> T {
        let nf = T::from_count(self.n);
        let edge = T::from_count(self.block_size) / nf;
        let t = t.max(edge).min(T::one() - edge);
        let first = self.block_size;
        let lo = ((t - self.bandwidth) * nf).ceil().to_usize().unwrap_or(0).max(first);
        let hi = ((t + self.bandwidth) * nf).floor().to_usize().unwrap_or(0).min(self.n - self.block_size);
        let (mut num, mut den) = (T::zero(), T::zero());
        for j in lo..=hi {
            let w = self.kernel.value((T::from_count(j) / nf - t) / self.bandwidth);
            num = num + w * self.scaled_squares[j - first];
            den = den + w;
        }
        if den > T::zero() { num / den } else { T::zero() }
    }

    /// Normalised weights `ω(t, j)` over the valid indices, as `(j, weight)`.
    pub fn weights(&self, t: T) -> Vec<(usize, T)> {
        let nf = T::from_count(self.n);
        let edge = T::from_count(self.block_size) / nf;
        let t = t.max(edge).min(T::one() - edge);
        let raw: Vec<(usize, T)> = (self.block_size..=self.n - self.block_size)
            .map(|j| (j, self.kernel.value((T::from_count(j) / nf - t) / self.bandwidth)))
            .filter(|&(_, w)| w > T::zero())
            .collect();
        let total: T = raw.iter().map(|&(_, w)| w).sum();
        raw.into_iter().map(|(j, w)| (j, w / total)).collect()
    }

    /// `σ̂(j/n)` for `j = 1..=n`.
    pub fn sd_at_design(&self) -> Vec<T> {
        let nf = T::from_count(self.n);
        (1..=self.n).map(|j| self.evaluate(T::from_count(j) / nf).max(T::zero()).sqrt()).collect()
    }
}

pub fn estimate_lrv<T: Scalar>(sample: &Sample<T>, block_size: usize, bandwidth: T, spec: &KernelSpec<T>) -> Result<LrvEstimate<T>> {
    let n = sample.len();
    let m = block_size;
    if m < 2 {
        return Err(invalid(format!("block size {m} must be at least 2")));
    }
    if 4 * m > n {
        return Err(Error::BlockTooLarge { m, n });
    }
    let edge = T::from_count(m) / T::from_count(n);
    if !(bandwidth > edge && bandwidth < T::lit(0.5)) {
        return Err(invalid(format!("LRV bandwidth {bandwidth} must lie in (m/n, 0.5) = ({edge}, 0.5)")));
    }
    let y = sample.responses();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(T::zero());
    for &v in y {
        prefix.push(prefix[prefix.len() - 1] + v);
    }
    let mf = T::from_count(m);
    let scaled_squares = (m..=n - m)
        .map(|j| {
            // S_{j-m+1, j} − S_{j+1, j+m}, both 1-based and inclusive
            let left = prefix[j] - prefix[j - m];
            let right = prefix[j + m] - prefix[j];
            let delta = (left - right) / mf;
            mf * delta * delta * T::lit(0.5)
        })
        .collect();
    Ok(LrvEstimate { n, block_size: m, bandwidth, kernel: spec.lrv_kernel(), scaled_squares })
}
