//! End-to-end analysis of two samples: bandwidths, fits, densities, shift,
//! statistic, point set, long-run variances and the bootstrap.

use crate::bootstrap::{bootstrap_test, BootstrapPlan, BootstrapResult};
use crate::error::Result;
use crate::io::config::AnalysisConfig;
use crate::kernels::KernelSpec;
use crate::lrv::{default_block_size, default_lrv_bandwidth, estimate_lrv, LrvEstimate};
use crate::scalar::Scalar;
use crate::shift::{
    device_point_set, estimate_shift_with, rearrangement_density, DensityEstimate, DevicePointSet, ShiftEstimate,
};
use crate::smoothing::{default_gcv_grid, fit_local_linear, gcv_bandwidth, CurveEstimate, Sample};
use crate::statistic::{test_statistic, TestStatistic};

/// Smallest admissible rearrangement grid.
pub const MIN_DENSITY_POINTS: usize = 50;

/// Everything estimated from one sample.
#[derive(Debug, Clone)]
pub struct SampleFit<T> {
    pub n: usize,
    pub bandwidth: T,
    /// Whether `bandwidth` came from GCV rather than an override.
    pub bandwidth_from_gcv: bool,
    pub curve: CurveEstimate<T>,
    pub density: DensityEstimate<T>,
}

#[derive(Debug, Clone)]
pub struct Analysis<T> {
    pub fits: [SampleFit<T>; 2],
    pub shift: ShiftEstimate<T>,
    pub statistic: TestStatistic<T>,
    pub device: DevicePointSet<T>,
    pub lrv: Option<[LrvEstimate<T>; 2]>,
    pub bootstrap: Option<BootstrapResult<T>>,
}

/// `N` for a sample of size `n`: the configured value, else `max(n, 50)`.
pub fn density_points(config: &AnalysisConfig, n: usize) -> usize {
    config.density_points.unwrap_or(n.max(MIN_DENSITY_POINTS))
}

/// Bandwidth, curve and rearrangement density for one sample.
pub fn fit_sample<T: Scalar>(
    sample: &Sample<T>,
    bandwidth: Option<f64>,
    config: &AnalysisConfig,
    spec: &KernelSpec<T>,
) -> Result<SampleFit<T>> {
    let n = sample.len();
    let (bandwidth, from_gcv) = match bandwidth {
        Some(b) => (T::lit(b), false),
        None => {
            let grid: Vec<T> = match &config.gcv_grid {
                Some(g) => g.values().into_iter().map(T::lit).collect(),
                None => default_gcv_grid(n),
            };
            (gcv_bandwidth(sample, spec, &grid)?, true)
        }
    };
    let curve = fit_local_linear(sample, bandwidth, spec)?;
    let h = T::lit(config.hd_rule.bandwidth(n));
    let density = rearrangement_density(&curve, density_points(config, n), h, spec)?;
    Ok(SampleFit { n, bandwidth, bandwidth_from_gcv: from_gcv, curve, density })
}

/// Long-run variance with the configured or default block size and bandwidth.
pub fn fit_lrv<T: Scalar>(sample: &Sample<T>, config: &AnalysisConfig, spec: &KernelSpec<T>) -> Result<LrvEstimate<T>> {
    let n = sample.len();
    let m = config.lrv_block.unwrap_or_else(|| default_block_size(n));
    let tau = config.lrv_bandwidth.map(T::lit).unwrap_or_else(|| default_lrv_bandwidth(n));
    estimate_lrv(sample, m, tau, spec)
}

/// Shift, statistic and point set; no bootstrap.
pub fn analyze_without_bootstrap<T: Scalar>(
    samples: [&Sample<T>; 2],
    config: &AnalysisConfig,
) -> Result<Analysis<T>> {
    config.validate()?;
    let spec = config.kernel_spec::<T>();
    let first = fit_sample(samples[0], config.bandwidth1, config, &spec)?;
    let second = fit_sample(samples[1], config.bandwidth2, config, &spec)?;
    let shift = estimate_shift_with(
        &first.density,
        &second.density,
        T::lit(config.eta),
        config.shift_grid,
        config.cdf_nodes,
    )?;
    let (d1, d2) = shift.order(&first.density, &second.density);
    let statistic = test_statistic(d1, d2, &shift, config.nodes)?;
    let device = device_point_set(&first.density, &second.density, &shift, config.points)?;
    Ok(Analysis { fits: [first, second], shift, statistic, device, lrv: None, bootstrap: None })
}

/// The full test.
pub fn analyze<T: Scalar>(samples: [&Sample<T>; 2], config: &AnalysisConfig) -> Result<Analysis<T>> {
    let mut analysis = analyze_without_bootstrap(samples, config)?;
    let spec = config.kernel_spec::<T>();
    let lrv = [fit_lrv(samples[0], config, &spec)?, fit_lrv(samples[1], config, &spec)?];
    let plan = BootstrapPlan::new(
        [&analysis.fits[0].density, &analysis.fits[1].density],
        [&lrv[0], &lrv[1]],
        &analysis.shift,
        config.nodes,
        &spec,
    )?;
    analysis.bootstrap = Some(bootstrap_test(&analysis.statistic, &plan, &config.bootstrap())?);
    analysis.lrv = Some(lrv);
    Ok(analysis)
}
