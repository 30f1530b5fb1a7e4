//! Probability-of-default estimation for low default portfolios.
//!
//! The crate covers three observation regimes:
//!
//! - [`independent`]: one period, independent defaults. Upper confidence
//!   bounds are Beta quantiles and the Bayesian posterior means have closed
//!   forms.
//! - [`correlated`]: one period, defaults driven by a single Gaussian
//!   systemic factor (Vasicek). Bounds come from root finding on the
//!   correlated binomial distribution, posterior means from nested quadrature.
//! - [`multi_period`]: a time series of pool sizes and default counts with
//!   an autoregressive systemic factor. Likelihoods are Monte-Carlo
//!   integrals over the factor path.
//!
//! [`distributions`] holds the special functions everything else is built
//! on, [`data`] the CSV format and the bundled datasets.

pub mod correlated;
pub mod data;
pub mod distributions;
mod error;
pub mod exec;
pub mod independent;
pub mod multi_period;
pub mod numerics;

pub use error::{Error, Result};
pub use exec::Execution;
pub use independent::{ConfidenceLevel, PortfolioObservation, PriorConstraint};

/// Basis points per unit probability.
pub const BPS: f64 = 10_000.0;
