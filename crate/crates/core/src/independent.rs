//! One observation period with independent defaults.
//!
//! With `n` borrowers and `k` observed defaults the default count is
//! Bin(n, λ). The upper confidence bound at level γ is the γ-quantile of
//! Beta(k + 1, n − k), which is also the posterior of λ under the improper
//! prior with density 1/(1 − λ). Posterior means are available in closed
//! form for that prior and for uniform priors on (0, u).

use serde::{Deserialize, Serialize};

use crate::distributions::{beta_cdf, beta_quantile, ln_beta_cdf, ln_beta_pdf, BetaParams};
use crate::{Error, Result};

/// Pool size at the start of the period and defaults observed by its end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortfolioObservation {
    n: u64,
    k: u64,
}

impl PortfolioObservation {
    pub fn new(n: u64, k: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("pool size must be positive".into()));
        }
        if k >= n {
            return Err(Error::Validation(format!(
                "defaults ({k}) must be smaller than the pool size ({n})"
            )));
        }
        Ok(PortfolioObservation { n, k })
    }

    pub fn pool_size(&self) -> u64 {
        self.n
    }

    pub fn defaults(&self) -> u64 {
        self.k
    }

    /// Posterior under the conservative prior: Beta(k + 1, n − k).
    fn conservative_posterior(&self) -> BetaParams {
        BetaParams {
            alpha: (self.k + 1) as f64,
            beta: (self.n - self.k) as f64,
        }
    }

    /// Posterior under the uniform prior on (0, 1): Beta(k + 1, n − k + 1).
    fn uniform_posterior(&self) -> BetaParams {
        BetaParams {
            alpha: (self.k + 1) as f64,
            beta: (self.n - self.k + 1) as f64,
        }
    }
}

/// Confidence level γ of a one-sided upper bound; the test size is 1 − γ.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ConfidenceLevel(f64);

impl ConfidenceLevel {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma < 1.0 {
            Ok(ConfidenceLevel(gamma))
        } else {
            Err(Error::domain(format!("confidence level must lie in (0, 1), got {gamma}")))
        }
    }

    pub fn gamma(self) -> f64 {
        self.0
    }

    pub fn alpha(self) -> f64 {
        1.0 - self.0
    }
}

impl TryFrom<f64> for ConfidenceLevel {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        ConfidenceLevel::new(v)
    }
}

impl From<ConfidenceLevel> for f64 {
    fn from(c: ConfidenceLevel) -> f64 {
        c.0
    }
}

/// Upper end `u` of the support of a uniform prior on (0, u).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PriorConstraint(f64);

impl PriorConstraint {
    pub const UNCONSTRAINED: PriorConstraint = PriorConstraint(1.0);

    pub fn new(u: f64) -> Result<Self> {
        if u > 0.0 && u <= 1.0 {
            Ok(PriorConstraint(u))
        } else {
            Err(Error::domain(format!("prior constraint must lie in (0, 1], got {u}")))
        }
    }

    pub fn upper(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PriorConstraint {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        PriorConstraint::new(v)
    }
}

impl From<PriorConstraint> for f64 {
    fn from(c: PriorConstraint) -> f64 {
        c.0
    }
}

/// Observed default rate k / n.
pub fn naive_estimate(obs: PortfolioObservation) -> f64 {
    obs.k as f64 / obs.n as f64
}

/// Upper confidence bound at level γ: the γ-quantile of Beta(k + 1, n − k).
pub fn ucb_independent(obs: PortfolioObservation, level: ConfidenceLevel) -> f64 {
    beta_quantile(obs.conservative_posterior(), level.gamma())
        .expect("shape parameters and level validated on construction")
}

/// Posterior mean under the conservative prior, (k + 1) / (n + 1).
pub fn conservative_bayes_independent(obs: PortfolioObservation) -> f64 {
    (obs.k + 1) as f64 / (obs.n + 1) as f64
}

/// Posterior mean under the uniform prior on (0, u):
/// (k + 1) P[Y(k+2, n−k+1) ≤ u] / ((n + 2) P[Y(k+1, n−k+1) ≤ u]).
pub fn neutral_bayes_independent(obs: PortfolioObservation, constraint: PriorConstraint) -> f64 {
    let u = constraint.upper();
    let unconstrained = (obs.k + 1) as f64 / (obs.n + 2) as f64;
    if u >= 1.0 {
        return unconstrained;
    }
    let shifted = BetaParams {
        alpha: (obs.k + 2) as f64,
        beta: (obs.n - obs.k + 1) as f64,
    };
    // Both probabilities underflow once u sits far below k/n; their ratio does not.
    let ln_num = ln_beta_cdf(shifted, u).expect("u validated");
    let ln_den = ln_beta_cdf(obs.uniform_posterior(), u).expect("u validated");
    unconstrained * (ln_num - ln_den).exp()
}

/// P[Λ ≤ λ | X = k] under the conservative prior.
pub fn posterior_cdf_conservative(obs: PortfolioObservation, lambda: f64) -> Result<f64> {
    beta_cdf(obs.conservative_posterior(), lambda)
}

/// Posterior density of λ under the uniform prior on (0, u): the
/// Beta(k + 1, n − k + 1) density truncated to (0, u).
pub fn posterior_density_uniform(
    obs: PortfolioObservation,
    constraint: PriorConstraint,
    lambda: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!("PD must lie in [0, 1], got {lambda}")));
    }
    let u = constraint.upper();
    if lambda >= u && u < 1.0 {
        return Ok(0.0);
    }
    let post = obs.uniform_posterior();
    Ok((ln_beta_pdf(post, lambda)? - ln_beta_cdf(post, u)?).exp())
}
