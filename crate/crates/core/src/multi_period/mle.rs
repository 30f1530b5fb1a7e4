use serde::{Deserialize, Serialize};

use super::likelihood::{ln_coefficients, ln_mean_kernel};
use super::{CorrelationParams, NormalDraws, SystemicFactorSample};
use crate::data::DefaultTimeSeries;
use crate::numerics::{nelder_mead, SimplexOptions};
use crate::{Error, Result};

/// Optimisation runs on logits clamped to ±25, i.e. parameters within
/// about 1.4e-11 of the boundary.
const LOGIT_BOUND: f64 = 25.0;

const SIMPLEX: SimplexOptions = SimplexOptions {
    step: 1.0,
    f_tol: 1e-9,
    x_tol: 1e-7,
    max_evals: 3000,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub lambda_hat: f64,
    pub rho_hat: f64,
    pub theta_hat: f64,
    pub log_likelihood: f64,
    pub converged: bool,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x.clamp(-LOGIT_BOUND, LOGIT_BOUND)).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln().clamp(-LOGIT_BOUND, LOGIT_BOUND)
}

fn degenerate(data: &DefaultTimeSeries, rho: f64, theta: f64) -> MleResult {
    MleResult {
        lambda_hat: 0.0,
        rho_hat: rho,
        theta_hat: theta,
        log_likelihood: ln_coefficients(data),
        converged: true,
    }
}

/// Joint maximum likelihood estimate of (λ, ϱ, ϑ). Every candidate ϑ reuses
/// the same innovations, so the objective is a deterministic smooth function.
pub fn mle_fit(data: &DefaultTimeSeries, draws: &NormalDraws) -> Result<MleResult> {
    if draws.periods() != data.periods() {
        return Err(Error::PeriodMismatch {
            sample: draws.periods(),
            data: data.periods(),
        });
    }
    if data.total_defaults() == 0 {
        return Ok(degenerate(data, 0.0, 0.0));
    }
    let naive = data.naive_estimate();
    let objective = |x: &[f64]| {
        let (lambda, rho, theta) = (logistic(x[0]), logistic(x[1]), logistic(x[2]));
        let sample = draws.factors(theta).expect("logistic keeps theta below 1");
        -ln_mean_kernel(lambda, rho, data, &sample)
    };
    let starts = [
        [naive, 0.10, 0.30],
        [2.0 * naive, 0.25, 0.60],
        [0.5 * naive, 0.03, 0.10],
    ];
    let best = starts
        .iter()
        .map(|s| {
            let x0: Vec<f64> = s.iter().map(|&p| logit(p.min(0.5))).collect();
            nelder_mead(objective, &x0, &SIMPLEX)
        })
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("three starts");
    Ok(MleResult {
        lambda_hat: logistic(best.x[0]),
        rho_hat: logistic(best.x[1]),
        theta_hat: logistic(best.x[2]),
        log_likelihood: ln_coefficients(data) - best.value,
        converged: best.converged,
    })
}

/// Maximum likelihood estimate of λ alone with (ϱ, ϑ) fixed by the sample
/// and `params`.
pub fn mle_fit_lambda(
    data: &DefaultTimeSeries,
    params: CorrelationParams,
    sample: &SystemicFactorSample,
) -> Result<MleResult> {
    if sample.periods() != data.periods() {
        return Err(Error::PeriodMismatch {
            sample: sample.periods(),
            data: data.periods(),
        });
    }
    if data.total_defaults() == 0 {
        return Ok(degenerate(data, params.rho(), params.theta()));
    }
    let naive = data.naive_estimate();
    let objective = |x: &[f64]| -ln_mean_kernel(logistic(x[0]), params.rho(), data, sample);
    let best = [naive, 4.0 * naive]
        .iter()
        .map(|&p| nelder_mead(objective, &[logit(p.min(0.5))], &SIMPLEX))
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("two starts");
    Ok(MleResult {
        lambda_hat: logistic(best.x[0]),
        rho_hat: params.rho(),
        theta_hat: params.theta(),
        log_likelihood: ln_coefficients(data) - best.value,
        converged: best.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{builtin_dataset, YearRecord};
    use crate::distributions::{corr_binomial_pmf, CorrBinomialParams};

    #[test]
    fn zero_defaults_give_zero_pd() {
        let data = DefaultTimeSeries::new(
            (0..3).map(|i| YearRecord { year: i, pool_size: 100, defaults: 0 }).collect(),
        )
        .unwrap();
        let draws = NormalDraws::generate(3, 100, 1, 0).unwrap();
        assert_eq!(mle_fit(&data, &draws).unwrap().lambda_hat, 0.0);
        let p = CorrelationParams::new(0.1, 0.2).unwrap();
        let r = mle_fit_lambda(&data, p, &draws.factors(0.2).unwrap()).unwrap();
        assert_eq!(r.lambda_hat, 0.0);
    }

    #[test]
    fn independent_pooled_estimate() {
        let data = DefaultTimeSeries::new(vec![
            YearRecord { year: 1, pool_size: 400, defaults: 2 },
            YearRecord { year: 2, pool_size: 600, defaults: 5 },
        ])
        .unwrap();
        let p = CorrelationParams::new(0.0, 0.0).unwrap();
        let sample = NormalDraws::generate(2, 500, 2, 0).unwrap().factors(0.0).unwrap();
        let r = mle_fit_lambda(&data, p, &sample).unwrap();
        assert!((r.lambda_hat - 0.007).abs() < 1e-6, "{}", r.lambda_hat);
        assert!(r.converged);
    }

    #[test]
    fn single_period_matches_grid_search() {
        // T = 1: the MC likelihood with many draws approximates the
        // correlated binomial pmf; compare the maximisers.
        let data = DefaultTimeSeries::single(200, 3).unwrap();
        let rho = 0.15;
        let p = CorrelationParams::new(rho, 0.0).unwrap();
        let sample = NormalDraws::generate(1, 40_000, 5, 0).unwrap().factors(0.0).unwrap();
        let r = mle_fit_lambda(&data, p, &sample).unwrap();
        let grid_best = (1..=400)
            .map(|i| i as f64 * 1e-4)
            .max_by(|&a, &b| {
                let pa = corr_binomial_pmf(CorrBinomialParams::new(200, a, rho).unwrap(), 3).unwrap();
                let pb = corr_binomial_pmf(CorrBinomialParams::new(200, b, rho).unwrap(), 3).unwrap();
                pa.total_cmp(&pb)
            })
            .unwrap();
        assert!((r.lambda_hat - grid_best).abs() < 1.5e-3, "{} vs {}", r.lambda_hat, grid_best);
    }

    #[test]
    fn fictitious_data_estimate() {
        let data = builtin_dataset("fictitious").unwrap().series;
        let draws = NormalDraws::generate(8, 2000, 36, 0).unwrap();
        let r = mle_fit(&data, &draws).unwrap();
        assert!((r.lambda_hat * 1e4 - 10.0).abs() < 0.5, "{r:?}");
        // One default: the likelihood peaks at ϱ = 0 but is flat there, so a
        // small sample leaves percent-level noise in ϱ̂.
        assert!(r.rho_hat < 0.03, "{r:?}");
    }
}
