//! Data-generating models and the Monte Carlo harness for size and power.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::BootstrapResult;
use crate::error::{invalid, Result};
use crate::io::config::AnalysisConfig;
use crate::pipeline::analyze;
use crate::rng::{child_seed, stream_rng, DOMAIN_SIMULATION};
use crate::scalar::Scalar;
use crate::smoothing::Sample;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// AR coefficient `a(t)` of the locally stationary recursion.
#[derive(Clone)]
pub enum Coefficient {
    /// `scale · (t − center)²`.
    Quadratic { scale: f64, center: f64 },
    Constant(f64),
    Custom(RealFn),
}

impl Coefficient {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Coefficient::Quadratic { scale, center } => scale * (t - center) * (t - center),
            Coefficient::Constant(a) => *a,
            Coefficient::Custom(f) => f(t),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Quadratic { scale, center } => write!(f, "{scale}(t-{center})^2"),
            Coefficient::Constant(a) => write!(f, "{a}"),
            Coefficient::Custom(_) => write!(f, "custom"),
        }
    }
}

#[derive(Clone)]
pub enum Innovation {
    StandardNormal,
    /// Student-t with 5 degrees of freedom scaled to unit variance.
    ScaledStudentT5,
    Custom(Arc<dyn Fn(&mut dyn rand::RngCore) -> f64 + Send + Sync>),
}

impl fmt::Debug for Innovation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Innovation::StandardNormal => write!(f, "N(0,1)"),
            Innovation::ScaledStudentT5 => write!(f, "t5/sqrt(5/3)"),
            Innovation::Custom(_) => write!(f, "custom"),
        }
    }
}

impl Innovation {
    pub fn draw(&self, rng: &mut dyn rand::RngCore) -> f64 {
        match self {
            Innovation::StandardNormal => rng.sample(StandardNormal),
            Innovation::ScaledStudentT5 => {
                let t: f64 = rng.sample(StudentT::new(5.0).expect("valid degrees of freedom"));
                t / (5.0f64 / 3.0).sqrt()
            }
            Innovation::Custom(f) => f(rng),
        }
    }
}

pub const DEFAULT_BURN_IN: usize = 200;

/// `e_i = a(i/n) e_{i−1} + η_i`.
#[derive(Debug, Clone)]
pub struct ErrorModel {
    pub coefficient: Coefficient,
    pub innovation: Innovation,
    pub burn_in: usize,
}

impl ErrorModel {
    /// `a(t) = 0.6 (t − 0.3)²` with the given innovations.
    pub fn locally_stationary(innovation: Innovation) -> Self {
        ErrorModel { coefficient: Coefficient::Quadratic { scale: 0.6, center: 0.3 }, innovation, burn_in: DEFAULT_BURN_IN }
    }

    pub fn iid(innovation: Innovation) -> Self {
        ErrorModel { coefficient: Coefficient::Constant(0.0), innovation, burn_in: 0 }
    }

    /// Long-run variance `1/(1 − a(t))²` for unit-variance innovations.
    pub fn long_run_variance(&self, t: f64) -> f64 {
        let a = self.coefficient.value(t);
        1.0 / ((1.0 - a) * (1.0 - a))
    }
}

/// `burn_in` steps at the `t = 0` coefficient, then `n` steps at `t = i/n`.
pub fn generate_errors(model: &ErrorModel, n: usize, rng: &mut dyn rand::RngCore) -> Vec<f64> {
    let mut e = 0.0;
    let a0 = model.coefficient.value(0.0);
    for _ in 0..model.burn_in {
        e = a0 * e + model.innovation.draw(rng);
    }
    (1..=n)
        .map(|i| {
            e = model.coefficient.value(i as f64 / n as f64) * e + model.innovation.draw(rng);
            e
        })
        .collect()
}

/// A regression function with its first two derivatives.
#[derive(Clone)]
pub struct RegressionFunction {
    pub value: RealFn,
    pub first: RealFn,
    pub second: RealFn,
}

impl fmt::Debug for RegressionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RegressionFunction")
    }
}

impl RegressionFunction {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        first: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        RegressionFunction { value: Arc::new(value), first: Arc::new(first), second: Arc::new(second) }
    }

    /// `(x − center)² + offset`.
    pub fn parabola(center: f64, offset: f64) -> Self {
        Self::new(move |x| (x - center).powi(2) + offset, move |x| 2.0 * (x - center), |_| 2.0)
    }

    /// `sin(−π(x + phase)) + offset`.
    pub fn sine(phase: f64, offset: f64) -> Self {
        Self::new(
            move |x| (-PI * (x + phase)).sin() + offset,
            move |x| -PI * (PI * (x + phase)).cos(),
            move |x| PI * PI * (PI * (x + phase)).sin(),
        )
    }

    pub fn design_values(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|i| (self.value)(i as f64 / n as f64)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "exA")]
    ExA,
    #[serde(rename = "exB")]
    ExB,
    #[serde(rename = "exC")]
    ExC,
    #[serde(rename = "exD")]
    ExD,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::ExA => "exA",
            Model::ExB => "exB",
            Model::ExC => "exC",
            Model::ExD => "exD",
        }
    }

    /// Whether the pair satisfies the shift hypothesis.
    pub fn is_null(self) -> bool {
        matches!(self, Model::ExA | Model::ExB)
    }

    pub fn pair(self) -> RegressionPair {
        let (first, second) = match self {
            Model::ExA => (RegressionFunction::parabola(0.4, 0.0), RegressionFunction::parabola(0.3, -0.2)),
            Model::ExB => (RegressionFunction::sine(0.0, 0.0), RegressionFunction::sine(0.1, 0.25)),
            Model::ExC => (
                RegressionFunction::parabola(0.4, 0.0),
                RegressionFunction::new(|x| x * x * x, |x| 3.0 * x * x, |x| 6.0 * x),
            ),
            Model::ExD => (
                RegressionFunction::sine(0.0, 0.0),
                RegressionFunction::new(
                    |x| -(PI * x).cos(),
                    |x| PI * (PI * x).sin(),
                    |x| PI * PI * (PI * x).cos(),
                ),
            ),
        };
        RegressionPair { name: self.name().to_string(), first, second }
    }
}

impl std::str::FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exa" | "a" => Ok(Model::ExA),
            "exb" | "b" => Ok(Model::ExB),
            "exc" | "c" => Ok(Model::ExC),
            "exd" | "d" => Ok(Model::ExD),
            _ => Err(format!("unknown scenario {s:?} (expected exA, exB, exC or exD)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegressionPair {
    pub name: String,
    pub first: RegressionFunction,
    pub second: RegressionFunction,
}

/// Tabulated second curve with `((m_2')⁻¹)' = ((m_1')⁻¹)' − ρ g` on
/// `[m_1'(0), m_1'(1)]`, obtained by integrating the perturbed inverse and
/// inverting it numerically. `ρ g` must keep the perturbed density positive.
#[derive(Debug, Clone)]
pub struct LocalAlternative {
    /// `m_2'` on a uniform grid of `[0, 1]`.
    slope: Vec<f64>,
    /// `m_2''` on the same grid.
    curvature: Vec<f64>,
    level: Vec<f64>,
}

impl LocalAlternative {
    /// `ρ_n = (n b^{9/2})^{-1/2}`.
    pub fn rate(n: usize, bandwidth: f64) -> f64 {
        (n as f64 * bandwidth.powf(4.5)).powf(-0.5)
    }

    pub fn new(base: &RegressionFunction, g: &dyn Fn(f64) -> f64, rho: f64, resolution: usize) -> Result<Self> {
        if resolution < 100 {
            return Err(invalid("resolution must be at least 100"));
        }
        let lo = (base.first)(0.0);
        let hi = (base.first)(1.0);
        // Inverse of m_1' by bisection; m_1' is increasing.
        let inverse = |t: f64| {
            let (mut a, mut b) = (0.0, 1.0);
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if (base.first)(mid) < t { a = mid } else { b = mid }
            }
            0.5 * (a + b)
        };
        let step = (hi - lo) / resolution as f64;
        let mut ts = Vec::with_capacity(resolution + 1);
        let mut dens = Vec::with_capacity(resolution + 1);
        for k in 0..=resolution {
            let t = lo + step * k as f64;
            let u = inverse(t);
            let f = 1.0 / (base.second)(u) - rho * g(t);
            if !(f > 0.0) {
                return Err(invalid(format!("perturbed inverse derivative is not positive at t = {t}")));
            }
            ts.push(t);
            dens.push(f);
        }
        let mut cum = vec![0.0; resolution + 1];
        for k in 1..=resolution {
            cum[k] = cum[k - 1] + 0.5 * step * (dens[k - 1] + dens[k]);
        }
        // m_2'(x) = t where cum(t) = x; beyond cum's range continue with the end slope.
        let slope_at = |x: f64| -> (f64, f64) {
            let k = cum.partition_point(|&c| c < x);
            if k == 0 {
                return (ts[0], 1.0 / dens[0]);
            }
            if k > resolution {
                let last = resolution;
                return (ts[last] + (x - cum[last]) / dens[last], 1.0 / dens[last]);
            }
            let w = (x - cum[k - 1]) / (cum[k] - cum[k - 1]);
            let d = dens[k - 1] + w * (dens[k] - dens[k - 1]);
            (ts[k - 1] + w * step, 1.0 / d)
        };
        let grid = resolution;
        let mut slope = Vec::with_capacity(grid + 1);
        let mut curvature = Vec::with_capacity(grid + 1);
        for k in 0..=grid {
            let (s, c) = slope_at(k as f64 / grid as f64);
            slope.push(s);
            curvature.push(c);
        }
        let mut level = vec![(base.value)(0.0); grid + 1];
        for k in 1..=grid {
            level[k] = level[k - 1] + 0.5 * (slope[k - 1] + slope[k]) / grid as f64;
        }
        Ok(LocalAlternative { slope, curvature, level })
    }

    fn interpolate(table: &[f64], x: f64) -> f64 {
        let last = table.len() - 1;
        let pos = x.clamp(0.0, 1.0) * last as f64;
        let k = (pos.floor() as usize).min(last - 1);
        let w = pos - k as f64;
        table[k] + w * (table[k + 1] - table[k])
    }

    pub fn function(&self) -> RegressionFunction {
        let (a, b, c) = (Arc::new(self.level.clone()), Arc::new(self.slope.clone()), Arc::new(self.curvature.clone()));
        RegressionFunction::new(
            move |x| Self::interpolate(&a, x),
            move |x| Self::interpolate(&b, x),
            move |x| Self::interpolate(&c, x),
        )
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub pair: RegressionPair,
    pub errors: [ErrorModel; 2],
    pub n: usize,
    pub runs: usize,
    pub alphas: Vec<f64>,
    /// Settings of every run; `replicates` is `B`.
    pub config: AnalysisConfig,
}

impl ScenarioSpec {
    /// Normal innovations for the first sample and scaled `t_5` for the second.
    pub fn preset(model: Model, n: usize, runs: usize, replicates: usize) -> Self {
        ScenarioSpec {
            pair: model.pair(),
            errors: [
                ErrorModel::locally_stationary(Innovation::StandardNormal),
                ErrorModel::locally_stationary(Innovation::ScaledStudentT5),
            ],
            n,
            runs,
            alphas: vec![0.05, 0.10],
            config: AnalysisConfig { replicates, ..AnalysisConfig::default() },
        }
    }

    fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(invalid("runs must be at least 1"));
        }
        if self.n < 50 {
            return Err(invalid(format!("n = {} must be at least 50", self.n)));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
            return Err(invalid("alpha levels must lie in (0, 1)"));
        }
        self.config.validate()
    }

    /// The two noisy samples of run `index`.
    pub fn samples(&self, seed: u64, index: u64) -> [Vec<f64>; 2] {
        let mut rng = stream_rng(seed, DOMAIN_SIMULATION, index);
        let e1 = generate_errors(&self.errors[0], self.n, &mut rng);
        let e2 = generate_errors(&self.errors[1], self.n, &mut rng);
        let y = |m: &RegressionFunction, e: Vec<f64>| {
            m.design_values(self.n).into_iter().zip(e).map(|(a, b)| a + b).collect()
        };
        [y(&self.pair.first, e1), y(&self.pair.second, e2)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum RunOutcome {
    Ok {
        statistic: f64,
        p_value: f64,
        c_hat: f64,
        d_hat: f64,
        a_hat: f64,
        b_hat: f64,
        swapped: bool,
        bandwidths: [f64; 2],
        /// One decision per alpha level.
        decisions: Vec<bool>,
    },
    Failed {
        code: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    #[serde(flatten)]
    pub outcome: RunOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRate {
    pub alpha: f64,
    /// Rejections over all runs; a run whose pipeline failed does not reject.
    pub rate: f64,
    /// `sqrt(rate (1 − rate) / runs)`.
    pub standard_error: f64,
    pub rejections: usize,
    /// Rejections over completed runs only.
    pub rate_completed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: String,
    pub n: usize,
    pub runs: usize,
    #[serde(rename = "B")]
    pub replicates: usize,
    pub seed: u64,
    pub completed: usize,
    pub failed: usize,
    pub rates: Vec<RejectionRate>,
    pub records: Vec<RunRecord>,
}

/// One pipeline execution on synthetic data.
pub fn run_once<T: Scalar>(spec: &ScenarioSpec, seed: u64, index: usize) -> RunOutcome {
    let [y1, y2] = spec.samples(seed, index as u64);
    let mut config = spec.config.clone();
    config.seed = child_seed(seed, DOMAIN_SIMULATION ^ 1, index as u64);
    let result = (|| {
        let s1 = Sample::new(y1.into_iter().map(T::lit).collect(), config.orientation1)?;
        let s2 = Sample::new(y2.into_iter().map(T::lit).collect(), config.orientation2)?;
        analyze::<T>([&s1, &s2], &config)
    })();
    match result {
        Ok(a) => {
            let boot = a.bootstrap.as_ref().expect("analyze runs the bootstrap");
            let decisions = spec
                .alphas
                .iter()
                .map(|&alpha| {
                    BootstrapResult::from_draws(a.statistic.value, boot.draws.clone(), T::lit(alpha), boot.seed)
                        .map(|r| r.decision)
                        .unwrap_or(false)
                })
                .collect();
            RunOutcome::Ok {
                statistic: a.statistic.value.as_f64(),
                p_value: boot.p_value.as_f64(),
                c_hat: a.shift.c_hat.as_f64(),
                d_hat: a.shift.d_hat.as_f64(),
                a_hat: a.shift.a_hat.as_f64(),
                b_hat: a.shift.b_hat.as_f64(),
                swapped: a.shift.swapped,
                bandwidths: [a.fits[0].bandwidth.as_f64(), a.fits[1].bandwidth.as_f64()],
                decisions,
            }
        }
        Err(e) => RunOutcome::Failed { code: e.code().to_string(), message: e.to_string() },
    }
}

/// Runs all Monte Carlo replications in parallel and tallies rejection rates.
pub fn run_scenario<T: Scalar>(spec: &ScenarioSpec, seed: u64) -> Result<ScenarioResult> {
    spec.validate()?;
    let records: Vec<RunRecord> = (0..spec.runs)
        .into_par_iter()
        .map(|index| RunRecord { index, outcome: run_once::<T>(spec, seed, index) })
        .collect();
    let completed: Vec<&Vec<bool>> = records
        .iter()
        .filter_map(|r| match &r.outcome {
            RunOutcome::Ok { decisions, .. } => Some(decisions),
            RunOutcome::Failed { .. } => None,
        })
        .collect();
    let done = completed.len();
    let rates = spec
        .alphas
        .iter()
        .enumerate()
        .map(|(k, &alpha)| {
            let rejections = completed.iter().filter(|d| d[k]).count();
            let runs = spec.runs as f64;
            let rate = rejections as f64 / runs;
            let rate_completed = if done > 0 { rejections as f64 / done as f64 } else { 0.0 };
            RejectionRate { alpha, rate, standard_error: (rate * (1.0 - rate) / runs).sqrt(), rejections, rate_completed }
        })
        .collect();
    Ok(ScenarioResult {
        scenario: spec.pair.name.clone(),
        n: spec.n,
        runs: spec.runs,
        replicates: spec.config.replicates,
        seed,
        completed: done,
        failed: spec.runs - done,
        rates,
        records,
    })
}
