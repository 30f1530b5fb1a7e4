use statrs::function::gamma::{gamma_ur, ln_gamma};

use super::beta::{incomplete_beta, BetaParams};
use crate::{Error, Result};

/// Largest pool size summed term by term; larger pools go through the
/// incomplete beta identity.
const DIRECT_SUM_MAX_N: u64 = 100;

pub fn ln_binomial_coefficient(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    if k == 0 || k == n {
        return 0.0;
    }
    let (n, k) = (n as f64, k as f64);
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// ln P[X = k] for X ~ Bin(n, p).
pub fn ln_binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let hits = if k == 0 { 0.0 } else { k as f64 * p.ln() };
    let misses = if k == n { 0.0 } else { (n - k) as f64 * (-p).ln_1p() };
    ln_binomial_coefficient(n, k) + hits + misses
}

pub fn binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
    ln_binomial_pmf(n, p, k).exp()
}

/// P[X ≤ k] for X ~ Bin(n, p). Negative `k` gives 0 and `k ≥ n` gives 1.
pub fn binomial_cdf(n: u64, p: f64, k: i64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("binomial success probability must lie in [0, 1], got {p}")));
    }
    if k < 0 {
        return Ok(0.0);
    }
    let k = k as u64;
    if k >= n {
        return Ok(1.0);
    }
    if p == 0.0 {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    Ok(binomial_cdf_interior(n, p, k))
}

pub(crate) fn binomial_cdf_interior(n: u64, p: f64, k: u64) -> f64 {
    if n <= DIRECT_SUM_MAX_N {
        let first = (n as f64 * (-p).ln_1p()).exp();
        if first < f64::MIN_POSITIVE {
            return (0..=k).map(|i| binomial_pmf(n, p, i)).sum::<f64>().min(1.0);
        }
        // Term ratio P[X = i + 1] / P[X = i] = (n − i) p / ((i + 1)(1 − p)).
        let odds = p / (1.0 - p);
        let mut term = first;
        let mut total = first;
        for i in 0..k {
            term *= (n - i) as f64 / (i + 1) as f64 * odds;
            total += term;
        }
        total.min(1.0)
    } else {
        // P[X ≤ k] = 1 - I_p(k + 1, n - k)
        let shape = BetaParams {
            alpha: (k + 1) as f64,
            beta: (n - k) as f64,
        };
        incomplete_beta(shape, p).1
    }
}

/// P[N ≤ k] for N ~ Poisson(mean).
pub fn poisson_cdf(k: u64, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 1.0;
    }
    gamma_ur(k as f64 + 1.0, mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{beta_cdf, BetaParams};

    fn choose(n: u64, k: u64) -> f64 {
        (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
    }

    #[test]
    fn worked_example_lower_tail() {
        let v = binomial_cdf(1000, 0.01, 1).unwrap();
        assert!((v - 0.0005).abs() < 0.00005, "{v}");
        // (1-λ)^1000 + 1000 λ (1-λ)^999
        let exact = 0.99f64.powi(1000) + 1000.0 * 0.01 * 0.99f64.powi(999);
        assert!(((v - exact) / exact).abs() < 1e-11);
    }

    #[test]
    fn brute_force_small_case() {
        // enumerate all 2^5 outcomes
        let p: f64 = 0.3;
        let mut oracle = 0.0;
        for mask in 0u32..32 {
            if mask.count_ones() <= 2 {
                let ones = mask.count_ones() as i32;
                oracle += p.powi(ones) * (1.0 - p).powi(5 - ones);
            }
        }
        assert!((binomial_cdf(5, 0.3, 2).unwrap() - oracle).abs() < 1e-15);
    }

    #[test]
    fn support_edges() {
        assert_eq!(binomial_cdf(7, 0.4, 7).unwrap(), 1.0);
        assert_eq!(binomial_cdf(7, 0.4, 9).unwrap(), 1.0);
        assert_eq!(binomial_cdf(7, 0.4, -1).unwrap(), 0.0);
        assert!(binomial_cdf(7, 1.4, 2).is_err());
    }

    #[test]
    fn beta_identity_across_the_switch() {
        for &n in &[50u64, 100, 101, 500, 2000] {
            for &k in &[0u64, 1, 3, 10] {
                for &p in &[1e-4, 0.002, 0.01, 0.2] {
                    let cdf = binomial_cdf(n, p, k as i64).unwrap();
                    let via_beta = 1.0 - beta_cdf(BetaParams::new((k + 1) as f64, (n - k) as f64).unwrap(), p).unwrap();
                    assert!((cdf - via_beta).abs() < 1e-10, "n={n} k={k} p={p}");
                    let direct: f64 = (0..=k)
                        .map(|i| choose(n, i) * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32))
                        .sum();
                    assert!((cdf - direct).abs() < 1e-12 * direct.max(1e-3), "n={n} k={k} p={p}");
                }
            }
        }
    }

    #[test]
    fn poisson_cdf_matches_direct_sum() {
        for &(k, mean) in &[(0u64, 0.3f64), (1, 1.678), (5, 4.0), (54, 60.0)] {
            let mut term = (-mean).exp();
            let mut sum = term;
            for j in 1..=k {
                term *= mean / j as f64;
                sum += term;
            }
            assert!((poisson_cdf(k, mean) - sum).abs() < 1e-13, "k={k}");
        }
        assert_eq!(poisson_cdf(3, 0.0), 1.0);
    }
}
