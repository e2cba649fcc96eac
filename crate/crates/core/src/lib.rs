//! Numerical laboratory for distributed ridgeless regression.
//!
//! Data is split across `M` workers, each fits the minimum-norm interpolant
//! on its shard, and the coordinator averages the local coefficient vectors.
//! This crate provides the covariance spectrum models, the Gaussian data
//! generator, the averaged estimator itself, exact conditional risk
//! decompositions, and closed-form evaluators for the matching risk bounds.
//!
//! All numeric kernels are generic over the scalar type (`f32` or `f64`);
//! the aliases at the crate root pin the default `f64` instantiation.

pub mod error;
pub mod estimator;
pub mod risk;
pub mod scalar;
pub mod simulate;
pub mod spectra;
pub mod theory;

pub use error::{Error, Result};
pub use scalar::Real;

/// Default-precision spectrum model.
pub type Spectrum = spectra::Spectrum<f64>;
/// Default-precision effective-rank report.
pub type EffectiveRankReport = spectra::EffectiveRankReport<f64>;
/// Default-precision simulation configuration.
pub type ModelConfig = simulate::ModelConfig<f64>;
/// Default-precision generated dataset.
pub type Dataset = simulate::Dataset<f64>;
/// Default-precision local shard fit.
pub type LocalFit = estimator::LocalFit<f64>;
/// Default-precision averaged estimator.
pub type AveragedEstimator = estimator::AveragedEstimator<f64>;
/// Default-precision Monte-Carlo risk report.
pub type RiskReport = risk::RiskReport<f64>;
/// Default-precision bound constants.
pub type TheoryConstants = theory::TheoryConstants<f64>;
/// Default-precision theory curve.
pub type TheoryCurve = theory::TheoryCurve<f64>;

/// Default-precision dense matrix.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Default-precision dense vector.
pub type Vector = nalgebra::DVector<f64>;
