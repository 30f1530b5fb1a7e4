//! One-factor Gaussian (Vasicek) default model: point-in-time PDs and the
//! correlated binomial distribution of the default count.

use serde::{Deserialize, Serialize};

use super::binomial::{binomial_cdf, binomial_cdf_interior, binomial_pmf, ln_binomial_coefficient};
use super::bivariate::bivariate_normal_cdf;
use super::normal::{ln_std_normal_cdf, quantile_unchecked, std_normal_cdf};
use crate::numerics::normal_expectation;
use crate::{Error, Result};

/// Agreement required between successive node doublings of the
/// systemic-factor integral.
pub(crate) const FACTOR_QUADRATURE_TOL: f64 = 1e-10;

/// G(λ, ϱ, ·): the default probability conditional on the systemic factor,
/// with λ and ϱ fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalPd {
    threshold: f64,
    loading: f64,
    residual: f64,
}

impl ConditionalPd {
    /// Requires 0 < λ < 1 and 0 ≤ ϱ < 1.
    pub fn new(lambda: f64, rho: f64) -> Self {
        debug_assert!(lambda > 0.0 && lambda < 1.0, "lambda = {lambda}");
        debug_assert!((0.0..1.0).contains(&rho), "rho = {rho}");
        ConditionalPd {
            threshold: quantile_unchecked(lambda),
            loading: rho.sqrt(),
            residual: (1.0 - rho).sqrt(),
        }
    }

    #[inline]
    fn argument(&self, y: f64) -> f64 {
        (self.threshold - self.loading * y) / self.residual
    }

    #[inline]
    pub fn at(&self, y: f64) -> f64 {
        std_normal_cdf(self.argument(y))
    }

    /// (ln G, ln(1 − G)) at factor value `y`, both accurate in the tails.
    #[inline]
    pub fn ln_pair(&self, y: f64) -> (f64, f64) {
        let z = self.argument(y);
        if z < 0.0 {
            let ln_g = ln_std_normal_cdf(z);
            (ln_g, (-ln_g.exp()).ln_1p())
        } else {
            let ln_q = ln_std_normal_cdf(-z);
            ((-ln_q.exp()).ln_1p(), ln_q)
        }
    }

    /// ln of G^k (1 − G)^(n−k), without the binomial coefficient.
    #[inline]
    pub fn ln_kernel(&self, n: u64, k: u64, y: f64) -> f64 {
        if k == 0 {
            let z = self.argument(y);
            let ln_q = if z < 0.0 { (-std_normal_cdf(z)).ln_1p() } else { ln_std_normal_cdf(-z) };
            return n as f64 * ln_q;
        }
        let (ln_g, ln_q) = self.ln_pair(y);
        k as f64 * ln_g + (n - k) as f64 * ln_q
    }
}

/// G(λ, ϱ, y) = Φ((Φ⁻¹(λ) − √ϱ y) / √(1 − ϱ)).
pub fn g_conditional_pd(lambda: f64, rho: f64, y: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    if lambda >= 1.0 {
        return 1.0;
    }
    ConditionalPd::new(lambda, rho).at(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrBinomialParams {
    pub n: u64,
    pub lambda: f64,
    pub rho: f64,
}

impl CorrBinomialParams {
    pub fn new(n: u64, lambda: f64, rho: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("pool size must be positive"));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::domain(format!("PD must lie in (0, 1), got {lambda}")));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::domain(format!("asset correlation must lie in [0, 1), got {rho}")));
        }
        Ok(CorrBinomialParams { n, lambda, rho })
    }
}

fn check_count(params: &CorrBinomialParams, k: i64) -> Result<u64> {
    if k < 0 || k as u64 > params.n {
        return Err(Error::domain(format!("default count {k} outside [0, {}]", params.n)));
    }
    Ok(k as u64)
}

/// P[X = k] under the one-factor model.
pub fn corr_binomial_pmf(params: CorrBinomialParams, k: i64) -> Result<f64> {
    let k = check_count(&params, k)?;
    let CorrBinomialParams { n, lambda, rho } = params;
    if rho == 0.0 {
        return Ok(binomial_pmf(n, lambda, k));
    }
    Ok(pmf_unchecked(n, lambda, rho, k))
}

pub(crate) fn pmf_unchecked(n: u64, lambda: f64, rho: f64, k: u64) -> f64 {
    let g = ConditionalPd::new(lambda, rho);
    let ln_coef = ln_binomial_coefficient(n, k);
    normal_expectation(|y| (ln_coef + g.ln_kernel(n, k, y)).exp(), FACTOR_QUADRATURE_TOL)
}

/// P[X ≤ k] under the one-factor model.
pub fn corr_binomial_cdf(params: CorrBinomialParams, k: i64) -> Result<f64> {
    let k = check_count(&params, k)?;
    let CorrBinomialParams { n, lambda, rho } = params;
    if k == n {
        return Ok(1.0);
    }
    if rho == 0.0 {
        return binomial_cdf(n, lambda, k as i64);
    }
    let g = ConditionalPd::new(lambda, rho);
    let v = normal_expectation(
        |y| {
            let p = g.at(y);
            if p <= 0.0 {
                1.0
            } else if p >= 1.0 {
                0.0
            } else {
                binomial_cdf_interior(n, p, k)
            }
        },
        FACTOR_QUADRATURE_TOL,
    );
    Ok(v.clamp(0.0, 1.0))
}

/// (E[X], var[X]) of the correlated binomial distribution.
pub fn corr_binomial_mean_var(params: CorrBinomialParams) -> Result<(f64, f64)> {
    let CorrBinomialParams { n, lambda, rho } = params;
    let n = n as f64;
    let z = quantile_unchecked(lambda);
    let joint = if rho == 0.0 {
        lambda * lambda
    } else {
        bivariate_normal_cdf(z, z, rho)?
    };
    let var = n * (lambda - lambda * lambda) + n * (n - 1.0) * (joint - lambda * lambda);
    Ok((n * lambda, var))
}
