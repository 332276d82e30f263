//! JSON report of an analysis.

use serde::{Deserialize, Serialize};

use crate::bootstrap::BootstrapResult;
use crate::io::config::AnalysisConfig;
use crate::pipeline::{density_points, Analysis};
use crate::scalar::Scalar;
use crate::smoothing::Orientation;

pub const SIGN_CONVENTION: &str =
    "m1(t) = m2(t + c) + d in the convex frame; c_signed and d_signed refer to the input order; \
     d_original maps d back to the units of the input files";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: usize,
    pub orientation: Orientation,
    pub bandwidth: f64,
    pub bandwidth_from_gcv: bool,
    pub density_points: usize,
    pub density_bandwidth: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lrv_block: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lrv_bandwidth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub c_prelim: f64,
    pub c_hat: f64,
    pub d_hat: f64,
    pub a_hat: f64,
    pub b_hat: f64,
    pub eta: f64,
    pub swapped: bool,
    pub c_signed: f64,
    pub d_signed: f64,
    /// Present when both samples share an orientation.
    pub d_original: Option<f64>,
    pub window: [f64; 2],
    pub convention: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticReport {
    #[serde(rename = "T")]
    pub value: f64,
    pub window: [f64; 2],
    #[serde(rename = "M")]
    pub grid_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawSummary {
    pub min: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
    pub max: f64,
}

impl DrawSummary {
    /// Order statistics `W_(⌈pB⌉)` of sorted draws.
    pub fn from_sorted(draws: &[f64]) -> Self {
        let q = |p: f64| draws[((p * draws.len() as f64).ceil() as usize).clamp(1, draws.len()) - 1];
        DrawSummary {
            min: draws[0],
            q05: q(0.05),
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
            q95: q(0.95),
            max: draws[draws.len() - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    #[serde(rename = "B")]
    pub replicates: usize,
    pub p_value: f64,
    pub decision: bool,
    pub alpha: f64,
    pub seed: u64,
    pub critical_value: f64,
    pub draws: DrawSummary,
}

impl BootstrapReport {
    pub fn new<T: Scalar>(result: &BootstrapResult<T>) -> Self {
        let draws: Vec<f64> = result.draws.iter().map(|w| w.as_f64()).collect();
        BootstrapReport {
            replicates: result.replicates,
            p_value: result.p_value.as_f64(),
            decision: result.decision,
            alpha: result.alpha.as_f64(),
            seed: result.seed,
            critical_value: result.critical_value.as_f64(),
            draws: DrawSummary::from_sorted(&draws),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSummary {
    #[serde(rename = "L")]
    pub points: usize,
    pub max_abs_difference: f64,
    pub mean_abs_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub inputs: Vec<String>,
    pub config: AnalysisConfig,
    pub samples: Vec<SampleSummary>,
    pub shift: ShiftReport,
    pub statistic: StatisticReport,
    pub device: DeviceSummary,
    pub bootstrap: Option<BootstrapReport>,
}

impl Report {
    pub fn new<T: Scalar>(analysis: &Analysis<T>, config: &AnalysisConfig, inputs: Vec<String>) -> Self {
        let orientations = [config.orientation1, config.orientation2];
        let samples = analysis
            .fits
            .iter()
            .enumerate()
            .map(|(s, fit)| SampleSummary {
                n: fit.n,
                orientation: orientations[s],
                bandwidth: fit.bandwidth.as_f64(),
                bandwidth_from_gcv: fit.bandwidth_from_gcv,
                density_points: density_points(config, fit.n),
                density_bandwidth: fit.density.bandwidth().as_f64(),
                lrv_block: analysis.lrv.as_ref().map(|l| l[s].block_size()),
                lrv_bandwidth: analysis.lrv.as_ref().map(|l| l[s].bandwidth().as_f64()),
            })
            .collect();
        let sh = &analysis.shift;
        let (lo, hi) = sh.window();
        let d_signed = sh.signed_d().as_f64();
        let shift = ShiftReport {
            c_prelim: sh.c_prelim.as_f64(),
            c_hat: sh.c_hat.as_f64(),
            d_hat: sh.d_hat.as_f64(),
            a_hat: sh.a_hat.as_f64(),
            b_hat: sh.b_hat.as_f64(),
            eta: sh.eta.as_f64(),
            swapped: sh.swapped,
            c_signed: sh.signed_c().as_f64(),
            d_signed,
            d_original: (orientations[0] == orientations[1]).then(|| orientations[0].sign::<f64>() * d_signed),
            window: [lo.as_f64(), hi.as_f64()],
            convention: SIGN_CONVENTION.to_string(),
        };
        let st = &analysis.statistic;
        Report {
            inputs,
            config: config.clone(),
            samples,
            shift,
            statistic: StatisticReport {
                value: st.value.as_f64(),
                window: [st.window.0.as_f64(), st.window.1.as_f64()],
                grid_size: st.grid_size,
            },
            device: DeviceSummary {
                points: analysis.device.points.len(),
                max_abs_difference: analysis.device.max_abs_difference().as_f64(),
                mean_abs_difference: analysis.device.mean_abs_difference().as_f64(),
            },
            bootstrap: analysis.bootstrap.as_ref().map(BootstrapReport::new),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are finite")
    }

    pub fn from_json(text: &str) -> crate::error::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::error::Error::Config(format!("report: {e}")))
    }
}
