//! Several observation periods with an autoregressive systemic factor.
//!
//! Year t defaults are conditionally binomial with PD G(λ, ϱ, S_t), where
//! (S_1, …, S_T) is Gaussian with corr[S_t, S_τ] = ϑ^|t−τ|. The factor path
//! is integrated out by Monte Carlo. Within a run the underlying normal
//! innovations stay fixed, so likelihoods, tail probabilities and posterior
//! grids are deterministic functions of the parameters.

mod bayes;
mod bounds;
mod factors;
mod likelihood;
mod mle;
mod runs;

use serde::{Deserialize, Serialize};

pub use crate::data::DefaultTimeSeries;
use crate::{Error, Result};
pub use bayes::{conservative_bayes_multi, neutral_bayes_multi, GridConfig, PosteriorGrid};
pub use bounds::{poisson_tail_probability, ucb_multi};
pub use factors::{build_sigma, sample_systemic_factors, FactorCorrelation, NormalDraws, SystemicFactorSample};
pub use likelihood::{conditional_likelihood, conditional_log_likelihood, log_marginal_likelihood, marginal_likelihood};
pub use mle::{mle_fit, mle_fit_lambda, MleResult};
pub use runs::{
    default_levels, multi_run_report, BoundEstimate, CorrelationMode, Estimate, ModeReport, RunStats,
    SimulationConfig, MIN_ITERATIONS,
};

/// Asset correlation ϱ and time correlation ϑ, both in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct CorrelationParams {
    rho: f64,
    theta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    rho: f64,
    theta: f64,
}

impl CorrelationParams {
    pub fn new(rho: f64, theta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::domain(format!("asset correlation must lie in [0, 1), got {rho}")));
        }
        if !(0.0..1.0).contains(&theta) {
            return Err(Error::domain(format!("time correlation must lie in [0, 1), got {theta}")));
        }
        Ok(CorrelationParams { rho, theta })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl TryFrom<RawParams> for CorrelationParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        CorrelationParams::new(raw.rho, raw.theta)
    }
}

impl From<CorrelationParams> for RawParams {
    fn from(p: CorrelationParams) -> Self {
        RawParams { rho: p.rho, theta: p.theta }
    }
}
