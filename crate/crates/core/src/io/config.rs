//! Declarative analysis settings, loadable from TOML or JSON.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bootstrap::{BootstrapConfig, MultiplierOrder, DEFAULT_ALPHA, DEFAULT_REPLICATES};
use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelSpec};
use crate::scalar::Scalar;
use crate::shift::{DEFAULT_CDF_NODES, DEFAULT_DEVICE_POINTS, DEFAULT_ETA, DEFAULT_SHIFT_GRID};
use crate::smoothing::{log_grid, Orientation};
use crate::statistic::DEFAULT_STATISTIC_NODES;

/// `lo:hi:count`, log-spaced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcvGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GcvGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        log_grid(self.lo, self.hi, self.count)
    }
}

impl FromStr for GcvGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("expected lo:hi:count, got {s:?}");
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi >= lo && count >= 1) {
            return Err(format!("need 0 < lo <= hi and count >= 1, got {s:?}"));
        }
        Ok(GcvGrid { lo, hi, count })
    }
}

/// Density bandwidth `h_d`: `n^{exponent}` per sample, or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "lowercase")]
pub enum HdRule {
    Power(f64),
    Fixed(f64),
}

impl Default for HdRule {
    fn default() -> Self {
        HdRule::Power(-1.0 / 3.0)
    }
}

impl HdRule {
    pub fn bandwidth(&self, n: usize) -> f64 {
        match *self {
            HdRule::Power(e) => (n as f64).powf(e),
            HdRule::Fixed(h) => h,
        }
    }
}

impl FromStr for HdRule {
    type Err = String;

    /// `power:-0.333`, `fixed:0.2`, or a bare number (fixed).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("cannot parse h_d rule {s:?}"));
        match s.split_once(':') {
            Some(("power", v)) => Ok(HdRule::Power(num(v)?)),
            Some(("fixed", v)) => Ok(HdRule::Fixed(num(v)?)),
            None => Ok(HdRule::Fixed(num(s)?)),
            _ => Err(format!("unknown h_d rule {s:?} (expected power:E or fixed:H)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub kernel: Kernel,
    pub density_kernel: Option<Kernel>,
    pub lrv_kernel: Option<Kernel>,
    pub bandwidth1: Option<f64>,
    pub bandwidth2: Option<f64>,
    pub gcv_grid: Option<GcvGrid>,
    /// `N`; defaults to each sample's size.
    pub density_points: Option<usize>,
    pub hd_rule: HdRule,
    pub eta: f64,
    /// `L`, size of the diagnostic point set.
    pub points: usize,
    /// `M`, quadrature nodes for `T` and the bootstrap.
    pub nodes: usize,
    pub shift_grid: usize,
    pub cdf_nodes: usize,
    pub lrv_block: Option<usize>,
    pub lrv_bandwidth: Option<f64>,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    pub multiplier_order: MultiplierOrder,
    pub orientation1: Orientation,
    pub orientation2: Orientation,
    pub out: Option<PathBuf>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            kernel: Kernel::Epanechnikov,
            density_kernel: None,
            lrv_kernel: None,
            bandwidth1: None,
            bandwidth2: None,
            gcv_grid: None,
            density_points: None,
            hd_rule: HdRule::default(),
            eta: DEFAULT_ETA,
            points: DEFAULT_DEVICE_POINTS,
            nodes: DEFAULT_STATISTIC_NODES,
            shift_grid: DEFAULT_SHIFT_GRID,
            cdf_nodes: DEFAULT_CDF_NODES,
            lrv_block: None,
            lrv_bandwidth: None,
            replicates: DEFAULT_REPLICATES,
            alpha: DEFAULT_ALPHA,
            seed: 0,
            multiplier_order: MultiplierOrder::default(),
            orientation1: Orientation::Convex,
            orientation2: Orientation::Convex,
            out: None,
        }
    }
}

impl AnalysisConfig {
    /// Reads a `.toml` or `.json` file (by extension; TOML otherwise).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let config: AnalysisConfig = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn kernel_spec<T: Scalar>(&self) -> KernelSpec<T> {
        KernelSpec::new(
            self.kernel,
            self.density_kernel.unwrap_or(self.kernel),
            self.lrv_kernel.unwrap_or(self.kernel),
        )
    }

    pub fn bootstrap(&self) -> BootstrapConfig {
        BootstrapConfig { replicates: self.replicates, alpha: self.alpha, seed: self.seed, order: self.multiplier_order }
    }

    /// Checks the ranges that do not depend on the data.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad(format!("eta = {} must be positive", self.eta));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} must lie in (0, 1)", self.alpha));
        }
        if self.replicates < 100 {
            return bad(format!("B = {} must be at least 100", self.replicates));
        }
        if self.nodes < 100 {
            return bad(format!("M = {} must be at least 100", self.nodes));
        }
        if self.points < 2 {
            return bad(format!("L = {} must be at least 2", self.points));
        }
        if self.shift_grid < 2 || self.cdf_nodes < 2 {
            return bad("shift and CDF grids need at least 2 intervals".into());
        }
        if let Some(n) = self.density_points {
            if n < 50 {
                return bad(format!("N = {n} must be at least 50"));
            }
        }
        match self.hd_rule {
            HdRule::Fixed(h) if !(h > 0.0) => return bad(format!("h_d = {h} must be positive")),
            HdRule::Power(e) if !(e < 0.0) => return bad(format!("h_d exponent {e} must be negative")),
            _ => {}
        }
        for b in [self.bandwidth1, self.bandwidth2].into_iter().flatten() {
            if !(b > 0.0 && b < 0.5) {
                return bad(format!("bandwidth {b} must lie in (0, 0.5)"));
            }
        }
        if let Some(m) = self.lrv_block {
            if m < 2 {
                return bad(format!("LRV block size {m} must be at least 2"));
            }
        }
        Ok(())
    }
}
