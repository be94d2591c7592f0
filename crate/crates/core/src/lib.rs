//! Teletraffic laboratory for sequential and concurrent paging in
//! multi-carrier CDMA: Erlang-C models, paging-message counts, synthetic
//! traffic, an RBF load predictor, error metrics, an M/M/c simulator and the
//! threshold controller that swaps between the two schemes.
//!
//! The numeric core is generic over the scalar type. The aliases below fix
//! it to `f64`, and [`Exact`] is the rational type accepted by the Erlang
//! functions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod des;
pub mod error;
pub mod format;
pub mod linalg;
pub mod metrics;
pub mod paging;
pub mod queueing;
pub mod rbf;
pub mod scalar;
pub mod strategy;
pub mod traffic;

pub use des::{little_check, replicate, simulate, ArrivalProcess, Estimate, SimConfig, SimResult};
pub use error::{Error, Result};
pub use metrics::{cross_correlation, cross_correlation_leading, error_metrics, pearson};
pub use paging::{concurrent_page_messages, message_saving, sequential_page_messages, PageCounting};
pub use queueing::{erlang_b, erlang_c, find_crossover, mean_system_time, sweep_curves, SystemTime};
pub use rbf::{activation, predict_series, train, MseUnits};
pub use scalar::{Field, Real};
pub use strategy::{compare_strategies, decide, run_strategy, Forecaster, PerfectForesight, Scheme, StrategyConfig};
pub use traffic::{generate, TrafficLabel, TrafficSeries, TrafficSpec};

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

pub type SchemeConfig = queueing::PagingSchemeConfig<f64>;
pub type Metrics = queueing::QueueMetrics<f64>;
pub type Curves = queueing::CurveTable<f64>;
pub type Chain = paging::AbsorbingChain<f64>;
pub type Scenario = paging::CarrierScenario<f64>;
pub type Model = rbf::RbfModel<f64>;
pub type TrainOptions = rbf::TrainOptions<f64>;
pub type TrainReport = rbf::TrainReport<f64>;
pub type ErrorReport = metrics::MetricsReport<f64>;
pub type Matrix = linalg::Matrix<f64>;
