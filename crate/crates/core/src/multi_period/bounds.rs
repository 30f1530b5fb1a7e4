use super::{CorrelationParams, SystemicFactorSample};
use crate::data::DefaultTimeSeries;
use crate::distributions::{poisson_cdf, ConditionalPd};
use crate::numerics::brent_root;
use crate::{ConfidenceLevel, Error, Result};

const LN_LAMBDA_BRACKET: (f64, f64) = (-27.6, -1e-12); // λ in [1e-12, 1)
const LN_LAMBDA_TOL: f64 = 1e-12;

/// P[Σ X_t ≤ K] with the conditional default count replaced by a Poisson
/// variable of intensity I = Σ_t n_t G(λ, ϱ, s_t), averaged over the sample.
pub fn poisson_tail_probability(
    lambda: f64,
    rho: f64,
    data: &DefaultTimeSeries,
    sample: &SystemicFactorSample,
) -> f64 {
    let total = data.total_defaults();
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda >= 1.0 {
        return poisson_cdf(total, data.obligor_years() as f64);
    }
    let g = ConditionalPd::new(lambda, rho);
    let sum: f64 = sample
        .rows()
        .map(|path| {
            let intensity: f64 = data
                .rows()
                .iter()
                .zip(path)
                .map(|(r, &s)| r.pool_size as f64 * g.at(s))
                .sum();
            poisson_cdf(total, intensity)
        })
        .sum();
    sum / sample.n_iter() as f64
}

/// Upper confidence bound: λ with averaged Poisson tail probability 1 − γ.
/// The sample stays fixed during the search, so the solved function is
/// monotone in λ.
pub fn ucb_multi(
    data: &DefaultTimeSeries,
    params: CorrelationParams,
    level: ConfidenceLevel,
    sample: &SystemicFactorSample,
) -> Result<f64> {
    if sample.periods() != data.periods() {
        return Err(Error::PeriodMismatch {
            sample: sample.periods(),
            data: data.periods(),
        });
    }
    let target = level.alpha();
    let f = |ln_lambda: f64| poisson_tail_probability(ln_lambda.exp(), params.rho(), data, sample) - target;
    brent_root(f, LN_LAMBDA_BRACKET.0, LN_LAMBDA_BRACKET.1, LN_LAMBDA_TOL).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::builtin_dataset;
    use crate::independent::ucb_independent;
    use crate::multi_period::sample_systemic_factors;
    use crate::PortfolioObservation;

    fn level(g: f64) -> ConfidenceLevel {
        ConfidenceLevel::new(g).unwrap()
    }

    #[test]
    fn fictitious_independent_bounds() {
        let data = builtin_dataset("fictitious").unwrap().series;
        let sample = sample_systemic_factors(0.0, 8, 100, 1).unwrap();
        let p = CorrelationParams::new(0.0, 0.0).unwrap();
        let bps = |g| ucb_multi(&data, p, level(g), &sample).unwrap() * 1e4;
        assert!((bps(0.75) - 26.9).abs() < 1.0);
        assert!((bps(0.5) - 16.8).abs() < 1.0);
        assert!((bps(0.999) - 92.6).abs() < 1.0);
    }

    #[test]
    fn poisson_root_at_zero_correlation() {
        // Σ_{j≤1} e^{-x} x^j / j! = 0.25 at x = λ N
        let data = DefaultTimeSeries::single(1000, 1).unwrap();
        let sample = sample_systemic_factors(0.0, 1, 10, 1).unwrap();
        let b = ucb_multi(&data, CorrelationParams::new(0.0, 0.0).unwrap(), level(0.75), &sample).unwrap();
        let x = b * 1000.0;
        assert!(((-x).exp() * (1.0 + x) - 0.25).abs() < 1e-10);
    }

    #[test]
    fn close_to_exact_binomial_for_small_expected_counts() {
        let sample = sample_systemic_factors(0.0, 1, 10, 1).unwrap();
        let p = CorrelationParams::new(0.0, 0.0).unwrap();
        for &(n, k) in &[(1000u64, 0u64), (1000, 1), (500, 2), (2000, 3)] {
            let data = DefaultTimeSeries::single(n, k).unwrap();
            for &g in &[0.5, 0.75, 0.9] {
                let approx = ucb_multi(&data, p, level(g), &sample).unwrap();
                if approx * n as f64 > 5.0 {
                    continue;
                }
                let exact = ucb_independent(PortfolioObservation::new(n, k).unwrap(), level(g));
                assert!(((approx - exact) / exact).abs() < 0.02, "n={n} k={k} g={g}");
            }
        }
    }

    #[test]
    fn bounds_increase_with_level_and_correlation() {
        let data = builtin_dataset("fictitious").unwrap().series;
        let sample = sample_systemic_factors(0.3, 8, 2000, 4).unwrap();
        let mut prev = 0.0;
        for &g in &[0.5, 0.75, 0.9, 0.95, 0.99] {
            let b = ucb_multi(&data, CorrelationParams::new(0.12, 0.3).unwrap(), level(g), &sample).unwrap();
            assert!(b > prev);
            prev = b;
        }
        let lo = ucb_multi(&data, CorrelationParams::new(0.12, 0.3).unwrap(), level(0.9), &sample).unwrap();
        let hi = ucb_multi(&data, CorrelationParams::new(0.24, 0.3).unwrap(), level(0.9), &sample).unwrap();
        assert!(hi > lo);
    }
}
