//! Network kriging: predicting traffic on unmonitored links from a subset of
//! monitored links, using the routing matrix and a fractional-Brownian-field
//! model of route traffic.
//!
//! The numerical core is generic over the scalar type (`f32` or `f64`);
//! the `*F64` / `*F32` aliases below fix it.
// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anomaly;
pub mod covariance;
pub mod error;
pub mod estimation;
pub mod kriging;
pub mod linalg;
pub mod protocol;
pub mod scalar;
pub mod sim;
pub mod topology;
pub mod trace;
pub mod validation;

pub use error::{Error, Result};
pub use scalar::Real;
pub use topology::{build_routing_matrix, internet2_topology, Link, Route, RoutingMatrix, Topology};

pub type TraceSetF64 = trace::TraceSet<f64>;
pub type TraceSetF32 = trace::TraceSet<f32>;
pub type FfbmSpecF64 = covariance::FfbmSpec<f64>;
pub type FfbmSpecF32 = covariance::FfbmSpec<f32>;
pub type TemporalCovF64 = covariance::TemporalCov<f64>;
pub type TemporalCovF32 = covariance::TemporalCov<f32>;
pub type SpatialCovF64 = covariance::SpatialCov<f64>;
pub type SpatialCovF32 = covariance::SpatialCov<f32>;
pub type KrigingModelF64 = kriging::KrigingModel<f64>;
pub type KrigingModelF32 = kriging::KrigingModel<f32>;
pub type PredictionResultF64 = kriging::PredictionResult<f64>;
pub type PredictionResultF32 = kriging::PredictionResult<f32>;
pub type WaveletSpectrumF64 = estimation::WaveletSpectrum<f64>;
pub type FlowStatsF64 = estimation::FlowStats<f64>;
pub type RegimeModelF64 = sim::RegimeModel<f64>;
pub type AnomalyReportF64 = anomaly::AnomalyReport<f64>;
