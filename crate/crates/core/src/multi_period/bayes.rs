use serde::{Deserialize, Serialize};

use super::likelihood::ln_mean_kernel;
use super::{CorrelationParams, SystemicFactorSample};
use crate::data::DefaultTimeSeries;
use crate::{Error, Execution, Result};

/// Outer grid u_i = (i / m) u, i = 0, …, m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    m: usize,
    u: f64,
}

impl GridConfig {
    pub const MIN_STEPS: usize = 10;

    pub fn new(m: usize, u: f64) -> Result<Self> {
        if m < Self::MIN_STEPS {
            return Err(Error::Config(format!("at least {} grid steps are required, got {m}", Self::MIN_STEPS)));
        }
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Config(format!("grid endpoint must lie in (0, 1], got {u}")));
        }
        Ok(GridConfig { m, u })
    }

    pub fn steps(&self) -> usize {
        self.m
    }

    pub fn upper(&self) -> f64 {
        self.u
    }

    fn point(&self, i: usize) -> f64 {
        i as f64 * self.u / self.m as f64
    }
}

/// Log Monte-Carlo likelihood (without binomial coefficients) at every
/// grid point, sharing one factor sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorGrid {
    points: Vec<f64>,
    ln_weights: Vec<f64>,
}

impl PosteriorGrid {
    pub fn evaluate(
        data: &DefaultTimeSeries,
        rho: f64,
        grid: GridConfig,
        sample: &SystemicFactorSample,
        exec: Execution,
    ) -> Result<Self> {
        if sample.periods() != data.periods() {
            return Err(Error::PeriodMismatch {
                sample: sample.periods(),
                data: data.periods(),
            });
        }
        let points: Vec<f64> = (0..=grid.m).map(|i| grid.point(i)).collect();
        let ln_weights = exec.map(&points, |&lambda| {
            if lambda >= 1.0 {
                // every k_t < n_t, so the likelihood vanishes at λ = 1
                f64::NEG_INFINITY
            } else {
                ln_mean_kernel(lambda, rho, data, sample)
            }
        });
        if ln_weights.iter().any(|w| w.is_nan()) || ln_weights.iter().all(|w| *w == f64::NEG_INFINITY) {
            return Err(Error::DegenerateGrid { u: grid.u });
        }
        Ok(PosteriorGrid { points, ln_weights })
    }

    /// Weights rescaled by the largest log value so the largest is 1.
    fn weights(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let max = self.ln_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.points
            .iter()
            .zip(&self.ln_weights)
            .map(move |(&u, &w)| (u, (w - max).exp()))
    }

    /// Σ u_i L_i / Σ L_i over i = 0..m.
    pub fn neutral(&self) -> f64 {
        let (num, den) = self
            .weights()
            .fold((0.0, 0.0), |(n, d), (u, w)| (n + u * w, d + w));
        num / den
    }

    /// Σ u_i L_i / (1 − u_i) over Σ L_i / (1 − u_i), for i = 0..m−1.
    pub fn conservative(&self) -> f64 {
        let m = self.points.len() - 1;
        let (num, den) = self
            .weights()
            .take(m)
            .fold((0.0, 0.0), |(n, d), (u, w)| {
                let w = w / (1.0 - u);
                (n + u * w, d + w)
            });
        num / den
    }
}

/// Grid approximation of the posterior mean under the uniform prior on (0, u).
pub fn neutral_bayes_multi(
    data: &DefaultTimeSeries,
    params: CorrelationParams,
    grid: GridConfig,
    sample: &SystemicFactorSample,
) -> Result<f64> {
    PosteriorGrid::evaluate(data, params.rho(), grid, sample, Execution::default()).map(|g| g.neutral())
}

/// Grid approximation of the posterior mean under the prior with density
/// 1/(1 − λ), truncated at u.
pub fn conservative_bayes_multi(
    data: &DefaultTimeSeries,
    params: CorrelationParams,
    grid: GridConfig,
    sample: &SystemicFactorSample,
) -> Result<f64> {
    PosteriorGrid::evaluate(data, params.rho(), grid, sample, Execution::default()).map(|g| g.conservative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::builtin_dataset;
    use crate::multi_period::sample_systemic_factors;

    fn zero() -> CorrelationParams {
        CorrelationParams::new(0.0, 0.0).unwrap()
    }

    #[test]
    fn independent_single_period_closed_forms() {
        let data = DefaultTimeSeries::single(1000, 1).unwrap();
        let sample = sample_systemic_factors(0.0, 1, 100, 1).unwrap();
        // The Riemann sum carries an h²/12 endpoint bias from L'(0) ≠ 0.
        let full = GridConfig::new(200_000, 1.0).unwrap();
        let neutral = neutral_bayes_multi(&data, zero(), full, &sample).unwrap();
        assert!((neutral - 2.0 / 1002.0).abs() < 1e-7, "{neutral}");
        let conservative = conservative_bayes_multi(&data, zero(), full, &sample).unwrap();
        assert!((conservative - 2.0 / 1001.0).abs() < 1e-7, "{conservative}");
    }

    #[test]
    fn truncation_at_point_one_is_harmless_for_low_defaults() {
        let data = builtin_dataset("fictitious").unwrap().series;
        let sample = sample_systemic_factors(0.0, 8, 100, 1).unwrap();
        let g = GridConfig::new(2500, 0.1).unwrap();
        let neutral = neutral_bayes_multi(&data, zero(), g, &sample).unwrap();
        assert!((neutral * 1e4 - 19.96).abs() < 0.05, "{neutral}");
    }

    #[test]
    fn neutral_increases_with_endpoint() {
        let data = builtin_dataset("fictitious").unwrap().series;
        let p = CorrelationParams::new(0.18, 0.3).unwrap();
        let sample = sample_systemic_factors(0.3, 8, 300, 2).unwrap();
        let mut prev = 0.0;
        for &u in &[0.002, 0.005, 0.01, 0.03, 0.1] {
            let v = neutral_bayes_multi(&data, p, GridConfig::new(500, u).unwrap(), &sample).unwrap();
            assert!(v >= prev, "u={u}");
            prev = v;
        }
    }

    #[test]
    fn no_defaults_keeps_origin_weight() {
        let data = DefaultTimeSeries::single(50, 0).unwrap();
        let sample = sample_systemic_factors(0.0, 1, 10, 1).unwrap();
        let g = PosteriorGrid::evaluate(&data, 0.0, GridConfig::new(10, 0.5).unwrap(), &sample, Execution::Serial)
            .unwrap();
        assert_eq!(g.ln_weights[0], 0.0);
        assert!(g.neutral() > 0.0);
    }

    #[test]
    fn tiny_grids_stay_finite_in_log_space() {
        // Raw likelihoods near 1e-2700 would underflow; log weights do not.
        let data = DefaultTimeSeries::single(10, 9).unwrap();
        let sample = sample_systemic_factors(0.0, 1, 10, 1).unwrap();
        let g = PosteriorGrid::evaluate(&data, 0.0, GridConfig::new(10, 1e-300).unwrap(), &sample, Execution::Serial)
            .unwrap();
        let v = g.neutral();
        assert!(v > 0.5e-300 && v <= 1e-300, "{v}");
    }

    #[test]
    fn parallel_and_serial_agree() {
        let data = builtin_dataset("fictitious").unwrap().series;
        let sample = sample_systemic_factors(0.5, 8, 200, 3).unwrap();
        let g = GridConfig::new(300, 0.1).unwrap();
        let a = PosteriorGrid::evaluate(&data, 0.2, g, &sample, Execution::Serial).unwrap();
        let b = PosteriorGrid::evaluate(&data, 0.2, g, &sample, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.neutral().to_bits(), b.neutral().to_bits());
    }

    #[test]
    fn grid_validation() {
        assert!(GridConfig::new(9, 0.1).is_err());
        assert!(GridConfig::new(10, 0.0).is_err());
        assert!(GridConfig::new(10, 1.5).is_err());
    }
}
