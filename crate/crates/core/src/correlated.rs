//! One period with defaults driven by a single Gaussian systemic factor.
//!
//! Upper bounds invert the correlated binomial cdf in λ. Posterior means are
//! ratios of λ-integrals of the correlated binomial pmf, each pmf value itself
//! an integral over the factor.

use serde::{Deserialize, Serialize};

use crate::distributions::vasicek::{ConditionalPd, FACTOR_QUADRATURE_TOL};
use crate::distributions::{corr_binomial_cdf, CorrBinomialParams};
use crate::independent::{
    conservative_bayes_independent, neutral_bayes_independent, ucb_independent,
};
use crate::numerics::{brent_root, integrate_adaptive_vec, normal_expectation};
use crate::{ConfidenceLevel, Error, PortfolioObservation, PriorConstraint, Result};

const LAMBDA_BRACKET: (f64, f64) = (1e-10, 1.0 - 1e-10);
const ROOT_X_TOL: f64 = 1e-14;
const OUTER_REL_TOL: f64 = 1e-9;
const OUTER_MAX_PIECES: usize = 4000;
/// Geometric refinement toward 0 and toward 1.
const GEOMETRIC_STEPS: i32 = 45;

/// A one-period observation together with its asset correlation ϱ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedObservation {
    obs: PortfolioObservation,
    rho: f64,
}

impl CorrelatedObservation {
    pub fn new(obs: PortfolioObservation, rho: f64) -> Result<Self> {
        if obs.pool_size() < 2 {
            return Err(Error::Validation("correlated model needs at least two borrowers".into()));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::domain(format!("asset correlation must lie in [0, 1), got {rho}")));
        }
        Ok(CorrelatedObservation { obs, rho })
    }

    pub fn observation(&self) -> PortfolioObservation {
        self.obs
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// λ solving P_λ[X ≤ k] = 1 − γ under the one-factor model.
pub fn ucb_correlated(cobs: CorrelatedObservation, level: ConfidenceLevel) -> Result<f64> {
    let CorrelatedObservation { obs, rho } = cobs;
    if rho == 0.0 {
        return Ok(ucb_independent(obs, level));
    }
    let (n, k) = (obs.pool_size(), obs.defaults() as i64);
    let target = level.alpha();
    let residual = |lambda: f64| {
        let params = CorrBinomialParams { n, lambda, rho };
        corr_binomial_cdf(params, k).expect("validated parameters") - target
    };
    brent_root(residual, LAMBDA_BRACKET.0, LAMBDA_BRACKET.1, ROOT_X_TOL)
}

/// Posterior mean under the prior with density 1/(1 − λ).
pub fn conservative_bayes_correlated(cobs: CorrelatedObservation) -> f64 {
    if cobs.rho == 0.0 {
        return conservative_bayes_independent(cobs.obs);
    }
    posterior_mean(cobs, 1.0, true)
}

/// Posterior mean under the uniform prior on (0, u).
pub fn neutral_bayes_correlated(cobs: CorrelatedObservation, constraint: PriorConstraint) -> f64 {
    if cobs.rho == 0.0 {
        return neutral_bayes_independent(cobs.obs, constraint);
    }
    posterior_mean(cobs, constraint.upper(), false)
}

fn breakpoints(u: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    pts.extend((1..=GEOMETRIC_STEPS).rev().map(|j| u * 0.5f64.powi(j)));
    if u < 1.0 {
        pts.push(u);
    } else {
        // The integrand is negligible beyond 1 - 2^-45, and stopping there
        // keeps every node strictly inside (0, 1).
        pts.extend((2..=GEOMETRIC_STEPS).map(|j| 1.0 - 0.5f64.powi(j)));
    }
    pts
}

fn posterior_mean(cobs: CorrelatedObservation, u: f64, conservative: bool) -> f64 {
    let (n, k) = (cobs.obs.pool_size(), cobs.obs.defaults());
    // The kernel G^k (1-G)^(n-k) never exceeds its value at G = k/n, so
    // dividing by that keeps the integrand at most 1 for any pool size.
    let p_hat = k as f64 / n as f64;
    let ln_peak = if k == 0 {
        0.0
    } else {
        k as f64 * p_hat.ln() + (n - k) as f64 * (-p_hat).ln_1p()
    };
    let integrand = |lambda: f64| -> [f64; 2] {
        if lambda <= 0.0 || lambda >= 1.0 {
            return [0.0, 0.0];
        }
        let g = ConditionalPd::new(lambda, cobs.rho);
        let p = normal_expectation(|y| (g.ln_kernel(n, k, y) - ln_peak).exp(), FACTOR_QUADRATURE_TOL);
        let w = if conservative { p / (1.0 - lambda) } else { p };
        [lambda * w, w]
    };
    let est = integrate_adaptive_vec(integrand, &breakpoints(u), 0.0, OUTER_REL_TOL, OUTER_MAX_PIECES);
    est.value[0] / est.value[1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cobs(n: u64, k: u64, rho: f64) -> CorrelatedObservation {
        CorrelatedObservation::new(PortfolioObservation::new(n, k).unwrap(), rho).unwrap()
    }

    fn level(g: f64) -> ConfidenceLevel {
        ConfidenceLevel::new(g).unwrap()
    }

    #[test]
    fn bounds_from_table() {
        let b = ucb_correlated(cobs(1000, 1, 0.18), level(0.5)).unwrap();
        assert!((b - 0.003789).abs() < 2e-5, "{b}");
        let b = ucb_correlated(cobs(1000, 1, 0.24), level(0.9)).unwrap();
        assert!((b - 0.029129).abs() < 2e-4, "{b}");
    }

    #[test]
    fn bound_residual() {
        let c = cobs(500, 2, 0.12);
        for &g in &[0.5, 0.9, 0.99] {
            let b = ucb_correlated(c, level(g)).unwrap();
            let p = CorrBinomialParams::new(500, b, 0.12).unwrap();
            assert!((corr_binomial_cdf(p, 2).unwrap() - (1.0 - g)).abs() < 1e-8);
        }
    }

    #[test]
    fn posterior_means_from_table() {
        let v = conservative_bayes_correlated(cobs(1000, 1, 0.18));
        assert!((v - 0.017455).abs() < 2e-6, "{v}");
        let v = neutral_bayes_correlated(cobs(1000, 1, 0.18), PriorConstraint::UNCONSTRAINED);
        assert!((v - 0.017028).abs() < 2e-6, "{v}");
        let v = neutral_bayes_correlated(cobs(125, 1, 0.24), PriorConstraint::new(0.01).unwrap());
        assert!((v - 0.005909).abs() < 2e-6, "{v}");
    }

    #[test]
    fn tiny_correlation_approaches_closed_forms() {
        // Goes through the quadrature path rather than the ρ = 0 shortcut.
        let c = cobs(250, 1, 1e-12);
        assert!((conservative_bayes_correlated(c) - 2.0 / 251.0).abs() < 1e-6);
        let v = neutral_bayes_correlated(c, PriorConstraint::UNCONSTRAINED);
        assert!((v - 2.0 / 252.0).abs() < 1e-6, "{v}");
        let u = PriorConstraint::new(0.01).unwrap();
        let exact = neutral_bayes_independent(c.observation(), u);
        assert!((neutral_bayes_correlated(c, u) - exact).abs() < 1e-8);
    }

    #[test]
    fn zero_correlation_reduces() {
        let c = cobs(125, 1, 0.0);
        assert_eq!(ucb_correlated(c, level(0.9)).unwrap(), ucb_independent(c.observation(), level(0.9)));
        assert_eq!(conservative_bayes_correlated(c), 2.0 / 126.0);
    }

    #[test]
    fn large_counts_do_not_underflow() {
        let v = neutral_bayes_correlated(cobs(2000, 900, 0.1), PriorConstraint::UNCONSTRAINED);
        assert!(v.is_finite() && v > 0.3 && v < 0.6, "{v}");
    }

    #[test]
    fn validation() {
        let o = PortfolioObservation::new(1, 0).unwrap();
        assert!(CorrelatedObservation::new(o, 0.1).is_err());
        let o = PortfolioObservation::new(10, 0).unwrap();
        assert!(CorrelatedObservation::new(o, 1.0).is_err());
        assert!(CorrelatedObservation::new(o, -0.1).is_err());
    }
}
