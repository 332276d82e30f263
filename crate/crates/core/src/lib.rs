//! Nonparametric test that two convex regression curves differ only by a
//! horizontal and a vertical shift, `m_1(t) = m_2(t + c) + d`.
//!
//! The estimators are generic over the floating-point type; the aliases below
//! fix it to `f64`.

pub mod bootstrap;
pub mod error;
pub mod io;
pub mod kernels;
pub mod lrv;
pub mod pipeline;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod shift;
pub mod simulation;
pub mod smoothing;
pub mod statistic;

pub use bootstrap::{bootstrap_test, BootstrapConfig, BootstrapPlan, MultiplierOrder};
pub use error::{Error, Result};
pub use io::config::{AnalysisConfig, GcvGrid, HdRule};
pub use io::ingest::ingest_csv;
pub use io::report::Report;
pub use kernels::{Kernel, KernelConstants};
pub use lrv::estimate_lrv;
pub use pipeline::{analyze, analyze_without_bootstrap};
pub use scalar::Scalar;
pub use shift::{device_point_set, estimate_shift, integrate_density, rearrangement_density, InverseDerivative};
pub use smoothing::{fit_local_linear, gcv_bandwidth, Orientation};
pub use statistic::{asymptotic_quantities, asymptotic_test, test_statistic, AsymptoticSide};

pub type KernelSpec = kernels::KernelSpec<f64>;
pub type Sample = smoothing::Sample<f64>;
pub type CurveEstimate = smoothing::CurveEstimate<f64>;
pub type DensityEstimate = shift::DensityEstimate<f64>;
pub type ShiftEstimate = shift::ShiftEstimate<f64>;
pub type DevicePointSet = shift::DevicePointSet<f64>;
pub type LrvEstimate = lrv::LrvEstimate<f64>;
pub type TestStatistic = statistic::TestStatistic<f64>;
pub type AsymptoticQuantities = statistic::AsymptoticQuantities<f64>;
pub type BootstrapResult = bootstrap::BootstrapResult<f64>;
pub type Analysis = pipeline::Analysis<f64>;
