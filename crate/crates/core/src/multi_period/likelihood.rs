use super::{CorrelationParams, SystemicFactorSample};
use crate::data::DefaultTimeSeries;
use crate::distributions::{ln_binomial_coefficient, ConditionalPd};
use crate::{Error, Result};

/// Σ_t ln C(n_t, k_t).
pub(crate) fn ln_coefficients(data: &DefaultTimeSeries) -> f64 {
    data.rows()
        .iter()
        .map(|r| ln_binomial_coefficient(r.pool_size, r.defaults))
        .sum()
}

/// Σ_t ln[G_t^k_t (1 − G_t)^(n_t − k_t)] along one factor path.
#[inline]
pub(crate) fn ln_kernel_path(g: &ConditionalPd, data: &DefaultTimeSeries, path: &[f64]) -> f64 {
    data.rows()
        .iter()
        .zip(path)
        .map(|(r, &s)| g.ln_kernel(r.pool_size, r.defaults, s))
        .sum()
}

/// ln of the Monte-Carlo average of exp(ln_kernel_path) over the sample,
/// binomial coefficients excluded. λ = 0 is the limit: 0 without defaults,
/// −∞ otherwise.
pub(crate) fn ln_mean_kernel(lambda: f64, rho: f64, data: &DefaultTimeSeries, sample: &SystemicFactorSample) -> f64 {
    if lambda <= 0.0 {
        return if data.total_defaults() == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let g = ConditionalPd::new(lambda, rho);
    let terms: Vec<f64> = sample.rows().map(|path| ln_kernel_path(&g, data, path)).collect();
    log_mean_exp(&terms)
}

pub(crate) fn log_mean_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    max + (sum / terms.len() as f64).ln()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::domain(format!("PD must lie in [0, 1), got {lambda}")))
    }
}

fn check_sample(params: CorrelationParams, data: &DefaultTimeSeries, sample: &SystemicFactorSample) -> Result<()> {
    if sample.periods() != data.periods() {
        return Err(Error::PeriodMismatch {
            sample: sample.periods(),
            data: data.periods(),
        });
    }
    if sample.theta() != params.theta() {
        return Err(Error::domain(format!(
            "factor sample was generated with time correlation {} but {} was requested",
            sample.theta(),
            params.theta()
        )));
    }
    Ok(())
}

/// ln Π_t P[Bin(n_t, G(λ, ϱ, s_t)) = k_t] for one factor path.
pub fn conditional_log_likelihood(lambda: f64, rho: f64, factors: &[f64], data: &DefaultTimeSeries) -> Result<f64> {
    check_lambda(lambda)?;
    CorrelationParams::new(rho, 0.0)?;
    if factors.len() != data.periods() {
        return Err(Error::PeriodMismatch {
            sample: factors.len(),
            data: data.periods(),
        });
    }
    if lambda == 0.0 {
        return Ok(if data.total_defaults() == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    let g = ConditionalPd::new(lambda, rho);
    Ok(ln_coefficients(data) + ln_kernel_path(&g, data, factors))
}

pub fn conditional_likelihood(lambda: f64, rho: f64, factors: &[f64], data: &DefaultTimeSeries) -> Result<f64> {
    conditional_log_likelihood(lambda, rho, factors, data).map(f64::exp)
}

/// ln of the Monte-Carlo marginal likelihood: the log of the average
/// conditional likelihood over the sample rows.
pub fn log_marginal_likelihood(
    lambda: f64,
    params: CorrelationParams,
    data: &DefaultTimeSeries,
    sample: &SystemicFactorSample,
) -> Result<f64> {
    check_lambda(lambda)?;
    check_sample(params, data, sample)?;
    Ok(ln_coefficients(data) + ln_mean_kernel(lambda, params.rho(), data, sample))
}

pub fn marginal_likelihood(
    lambda: f64,
    params: CorrelationParams,
    data: &DefaultTimeSeries,
    sample: &SystemicFactorSample,
) -> Result<f64> {
    log_marginal_likelihood(lambda, params, data, sample).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::YearRecord;
    use crate::distributions::{binomial_pmf, g_conditional_pd};
    use crate::multi_period::{sample_systemic_factors, NormalDraws};
    use crate::numerics::normal_expectation;

    fn series(rows: &[(u64, u64)]) -> DefaultTimeSeries {
        DefaultTimeSeries::new(
            rows.iter()
                .enumerate()
                .map(|(i, &(n, k))| YearRecord {
                    year: 2000 + i as i32,
                    pool_size: n,
                    defaults: k,
                })
                .collect(),
        )
        .unwrap()
    }

    fn params(rho: f64, theta: f64) -> CorrelationParams {
        CorrelationParams::new(rho, theta).unwrap()
    }

    #[test]
    fn zero_correlation_is_product_of_binomials() {
        let data = series(&[(100, 1), (120, 0), (90, 3)]);
        let exact = binomial_pmf(100, 0.01, 1) * binomial_pmf(120, 0.01, 0) * binomial_pmf(90, 0.01, 3);
        let v = conditional_likelihood(0.01, 0.0, &[2.0, -1.0, 0.3], &data).unwrap();
        assert!(((v - exact) / exact).abs() < 1e-12);
        let sample = sample_systemic_factors(0.4, 3, 50, 1).unwrap();
        let m = marginal_likelihood(0.01, params(0.0, 0.4), &data, &sample).unwrap();
        assert!(((m - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn single_period_term() {
        let data = series(&[(50, 2)]);
        let g = g_conditional_pd(0.03, 0.2, -0.7);
        let v = conditional_likelihood(0.03, 0.2, &[-0.7], &data).unwrap();
        assert!((v - binomial_pmf(50, g, 2)).abs() < 1e-14);
    }

    #[test]
    fn enumeration_oracle() {
        // T = 2, n_t = 3: hand-expanded pmf products
        let data = series(&[(3, 1), (3, 0)]);
        let (lambda, rho, s) = (0.1, 0.3, [0.5, -1.2]);
        let g1 = g_conditional_pd(lambda, rho, s[0]);
        let g2 = g_conditional_pd(lambda, rho, s[1]);
        let exact = 3.0 * g1 * (1.0 - g1).powi(2) * (1.0 - g2).powi(3);
        let v = conditional_likelihood(lambda, rho, &s, &data).unwrap();
        assert!((v - exact).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_matches_nested_quadrature() {
        let data = series(&[(40, 1), (60, 2)]);
        let (lambda, rho, theta) = (0.02, 0.25, 0.5);
        let sample = sample_systemic_factors(theta, 2, 20_000, 11).unwrap();
        let mc = marginal_likelihood(lambda, params(rho, theta), &data, &sample).unwrap();
        let values: Vec<f64> = sample
            .rows()
            .map(|p| conditional_likelihood(lambda, rho, p, &data).unwrap())
            .collect();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let inner = (1.0 - theta * theta).sqrt();
        let exact = normal_expectation(
            |s1| {
                normal_expectation(
                    |z2| conditional_likelihood(lambda, rho, &[s1, theta * s1 + inner * z2], &data).unwrap(),
                    1e-14,
                )
            },
            1e-14,
        );
        assert!((mc - mean).abs() < 1e-14 * mean);
        assert!((mc - exact).abs() < 3.0 * sd / n.sqrt(), "{mc} vs {exact}");
    }

    #[test]
    fn impossible_data_at_zero_pd() {
        let data = series(&[(10, 1)]);
        let sample = sample_systemic_factors(0.0, 1, 10, 1).unwrap();
        assert_eq!(marginal_likelihood(0.0, params(0.2, 0.0), &data, &sample).unwrap(), 0.0);
        let clean = series(&[(10, 0)]);
        assert_eq!(marginal_likelihood(0.0, params(0.2, 0.0), &clean, &sample).unwrap(), 1.0);
    }

    #[test]
    fn log_space_survives_large_pools() {
        let data = crate::data::builtin_dataset("moodys_investment_grade").unwrap().series;
        let draws = NormalDraws::generate(21, 200, 3, 0).unwrap();
        let sample = draws.factors(0.3).unwrap();
        let ll = log_marginal_likelihood(0.001, params(0.2, 0.3), &data, &sample).unwrap();
        assert!(ll.is_finite() && ll < 0.0, "{ll}");
    }

    #[test]
    fn mismatches_rejected() {
        let data = series(&[(10, 1), (10, 0)]);
        let sample = sample_systemic_factors(0.2, 3, 10, 1).unwrap();
        assert_eq!(
            marginal_likelihood(0.1, params(0.1, 0.2), &data, &sample),
            Err(Error::PeriodMismatch { sample: 3, data: 2 })
        );
        let sample = sample_systemic_factors(0.2, 2, 10, 1).unwrap();
        assert!(marginal_likelihood(0.1, params(0.1, 0.3), &data, &sample).is_err());
        assert!(marginal_likelihood(1.0, params(0.1, 0.2), &data, &sample).is_err());
    }
}
