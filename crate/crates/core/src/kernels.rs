//! Kernel functions on `[-1, 1]`, the local-linear equivalent kernel and the
//! constants that enter the asymptotic bias and variance.
//!
//! Three kernel roles appear downstream: the smoothing kernel `K` of the
//! local-linear fit, the density kernel `K_d` of the rearrangement estimate and
//! the kernel `H` that localises the long-run variance. The equivalent kernel
//! `K°(x) = K(x)·x / μ₂` is the effective kernel of the local-linear slope.
//!
//! Moment integrals are computed once, at construction, with a composite
//! trapezoid rule on a configurable number of nodes followed by two Richardson
//! steps, which makes them exact for the polynomial kernels offered here.

use serde::{Deserialize, Serialize};

use crate::quadrature::{refined_trapezoid, trapezoid};
use crate::scalar::Scalar;

/// Kernel shapes supported on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// `0.75 (1 - x²)`. Not differentiable at ±1; derivatives there are one-sided limits.
    #[default]
    Epanechnikov,
    /// `15/16 (1 - x²)²`, twice differentiable on the real line.
    Biweight,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Epanechnikov => "epanechnikov",
            Kernel::Biweight => "biweight",
        }
    }

    #[inline]
    pub fn value<T: Scalar>(self, x: T) -> T {
        if x.abs() > T::one() {
            return T::zero();
        }
        let q = T::one() - x * x;
        match self {
            Kernel::Epanechnikov => T::lit(0.75) * q,
            Kernel::Biweight => T::lit(15.0 / 16.0) * q * q,
        }
    }

    /// First derivative; 0 outside `[-1, 1]` and the one-sided limit at ±1.
    #[inline]
    pub fn derivative<T: Scalar>(self, x: T) -> T {
        if x.abs() > T::one() {
            return T::zero();
        }
        match self {
            Kernel::Epanechnikov => T::lit(-1.5) * x,
            Kernel::Biweight => T::lit(-15.0 / 4.0) * x * (T::one() - x * x),
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "epanechnikov" | "epa" => Ok(Kernel::Epanechnikov),
            "biweight" | "quartic" => Ok(Kernel::Biweight),
            other => Err(format!("unknown kernel {other:?} (expected epanechnikov | biweight)")),
        }
    }
}

/// Integrals that depend on the kernels only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants<T> {
    /// `μ₂ = ∫ K(x) x² dx`.
    pub second_moment: T,
    /// `∫ v K_d'(v) dv` (equals −1 for any density kernel vanishing at ±1).
    pub density_slope_moment: T,
    /// `((K°)' * (K°)')(0)`.
    pub kprime_convolution_at_zero: T,
    /// `∫ ((K°)' * (K°)'(z))² dz`.
    pub kprime_convolution_sq_integral: T,
}

/// The kernels used by one analysis together with their derived constants.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec<T> {
    base: Kernel,
    density: Kernel,
    lrv: Kernel,
    quad_nodes: usize,
    constants: KernelConstants<T>,
}

pub const DEFAULT_QUAD_NODES: usize = 512;
const OUTER_CONVOLUTION_NODES: usize = 128;

impl<T: Scalar> Default for KernelSpec<T> {
    fn default() -> Self {
        Self::uniform(Kernel::Epanechnikov)
    }
}

impl<T: Scalar> KernelSpec<T> {
    /// Same kernel for all three roles.
    pub fn uniform(kernel: Kernel) -> Self {
        Self::new(kernel, kernel, kernel)
    }

    pub fn new(base: Kernel, density: Kernel, lrv: Kernel) -> Self {
        Self::with_quad_nodes(base, density, lrv, DEFAULT_QUAD_NODES)
    }

    pub fn with_quad_nodes(base: Kernel, density: Kernel, lrv: Kernel, quad_nodes: usize) -> Self {
        let quad_nodes = quad_nodes.max(16);
        let one = T::one();
        let second_moment = refined_trapezoid(|x: T| base.value(x) * x * x, -one, one, quad_nodes);
        let density_slope_moment = refined_trapezoid(|v: T| v * density.derivative(v), -one, one, quad_nodes);
        let mut spec = KernelSpec {
            base,
            density,
            lrv,
            quad_nodes,
            constants: KernelConstants {
                second_moment,
                density_slope_moment,
                kprime_convolution_at_zero: T::zero(),
                kprime_convolution_sq_integral: T::zero(),
            },
        };
        spec.constants.kprime_convolution_at_zero = spec.refined_kprime_convolution(T::zero());
        // conv(z) is even and a polynomial on [0, 2].
        let half = refined_trapezoid(
            |z: T| {
                let c = spec.refined_kprime_convolution(z);
                c * c
            },
            T::zero(),
            T::lit(2.0),
            OUTER_CONVOLUTION_NODES,
        );
        spec.constants.kprime_convolution_sq_integral = T::lit(2.0) * half;
        spec
    }

    pub fn base_kernel(&self) -> Kernel {
        self.base
    }

    pub fn density_kernel(&self) -> Kernel {
        self.density
    }

    pub fn lrv_kernel(&self) -> Kernel {
        self.lrv
    }

    pub fn quad_nodes(&self) -> usize {
        self.quad_nodes
    }

    pub fn constants(&self) -> &KernelConstants<T> {
        &self.constants
    }

    pub fn second_moment(&self) -> T {
        self.constants.second_moment
    }

    #[inline]
    pub fn base(&self, x: T) -> T {
        self.base.value(x)
    }

    #[inline]
    pub fn base_derivative(&self, x: T) -> T {
        self.base.derivative(x)
    }

    #[inline]
    pub fn density(&self, x: T) -> T {
        self.density.value(x)
    }

    #[inline]
    pub fn density_derivative(&self, x: T) -> T {
        self.density.derivative(x)
    }

    #[inline]
    pub fn lrv(&self, x: T) -> T {
        self.lrv.value(x)
    }

    /// `K°(x) = K(x)·x / μ₂`; zero for `|x| ≥ 1`.
    #[inline]
    pub fn equivalent_kernel(&self, x: T) -> T {
        if x.abs() >= T::one() {
            return T::zero();
        }
        self.base.value(x) * x / self.constants.second_moment
    }

    /// `(K°)'(x) = (K'(x)·x + K(x)) / μ₂` on `[-1, 1]`, zero outside.
    #[inline]
    pub fn equivalent_kernel_derivative(&self, x: T) -> T {
        if x.abs() > T::one() {
            return T::zero();
        }
        (self.base.derivative(x) * x + self.base.value(x)) / self.constants.second_moment
    }

    fn overlap(z: T) -> Option<(T, T)> {
        let one = T::one();
        let lo = (-one).max(-one - z);
        let hi = one.min(one - z);
        (hi > lo).then_some((lo, hi))
    }

    /// Trapezoid approximation of `∫ (K°)'(y) (K°)'(z + y) dy` on `quad_points` intervals
    /// of the overlap of the two supports.
    pub fn kprime_convolution(&self, z: T, quad_points: usize) -> T {
        match Self::overlap(z) {
            Some((lo, hi)) => trapezoid(
                |y| self.equivalent_kernel_derivative(y) * self.equivalent_kernel_derivative(z + y),
                lo,
                hi,
                quad_points,
            ),
            None => T::zero(),
        }
    }

    fn refined_kprime_convolution(&self, z: T) -> T {
        match Self::overlap(z) {
            Some((lo, hi)) => refined_trapezoid(
                |y| self.equivalent_kernel_derivative(y) * self.equivalent_kernel_derivative(z + y),
                lo,
                hi,
                self.quad_nodes,
            ),
            None => T::zero(),
        }
    }
}
