//! Asymmetric volatility-spillover analytics for high-frequency price data.
//!
//! The pipeline runs in stages, each usable on its own: tick ingestion onto
//! a trading-calendar bar grid ([`ingest`]), daily realized variance and
//! signed semivariance measures ([`realized`]), vector-autoregression
//! estimation with moving-average coefficients ([`var`]), generalized
//! forecast-error variance decompositions and the spillover index family
//! ([`spillover`]), rolling windows and the spillover asymmetry measure
//! ([`asymmetry`]), and a factor stochastic-volatility simulator with a
//! bootstrap null distribution for hypothesis tests ([`sim`], [`bootstrap`]).
//!
//! Numerical code is generic over the scalar type through [`Real`]; the
//! crate root exports `f64` aliases for the common case.

pub mod asymmetry;
pub mod bootstrap;
pub mod error;
pub mod ingest;
pub mod io;
pub mod linalg;
pub mod realized;
pub mod scalar;
pub mod sim;
pub mod spillover;
pub mod var;

pub use error::{Error, ErrorKind, Result};
pub use scalar::Real;

pub use asymmetry::{Direction, RollingSpec, SamFlag, SamKind, WindowFlag};
pub use bootstrap::{Decision, PipelineConfig};
pub use realized::MeasureKind;
pub use sim::Subsample;
pub use spillover::SigmaConvention;
pub use var::VarSpec;

/// Intraday log-price panel in double precision.
pub type IntradayPanel = ingest::IntradayPanel<f64>;
/// Daily measure panel in double precision.
pub type MeasurePanel = realized::MeasurePanel<f64>;
/// The three daily measure panels in double precision.
pub type Measures = realized::Measures<f64>;
/// Estimated system in double precision.
pub type VarFit = var::VarFit<f64>;
/// Moving-average coefficients in double precision.
pub type MaCoefficients = var::MaCoefficients<f64>;
/// Variance decomposition in double precision.
pub type FevdResult = spillover::FevdResult<f64>;
/// Spillover index family in double precision.
pub type SpilloverSet = spillover::SpilloverSet<f64>;
/// Rolling spillover series in double precision.
pub type RollingSpillovers = asymmetry::RollingSpillovers<f64>;
/// SAM series in double precision.
pub type SamSeries = asymmetry::SamSeries<f64>;
/// Simulator parameters in double precision.
pub type SvParams = sim::SvParams<f64>;
/// Simulated measure panels in double precision.
pub type SimulatedPanel = sim::SimulatedPanel<f64>;
/// Bootstrap SAM distribution in double precision.
pub type SamDistribution = bootstrap::SamDistribution<f64>;
