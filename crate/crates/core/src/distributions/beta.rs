use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

const CF_MAX_ITER: usize = 2000;
const CF_EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
/// Shapes at or above this use Stirling's series with explicit cancellation.
const STIRLING_MIN: f64 = 10.0;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::domain(format!(
                "beta shape parameters must be positive, got ({alpha}, {beta})"
            )));
        }
        Ok(BetaParams { alpha, beta })
    }

    fn ln_beta_fn(&self) -> f64 {
        ln_gamma(self.alpha) + ln_gamma(self.beta) - ln_gamma(self.alpha + self.beta)
    }
}

/// ln Γ(z) − [(z − ½) ln z − z + ½ ln 2π] for z ≥ 10.
fn stirling_correction(z: f64) -> f64 {
    let w = 1.0 / (z * z);
    let series = 1.0 / 12.0
        - w * (1.0 / 360.0
            - w * (1.0 / 1260.0
                - w * (1.0 / 1680.0 - w * (1.0 / 1188.0 - w * (691.0 / 360_360.0 - w / 156.0)))));
    series / z
}

/// ln[x^a (1 − x)^b / B(a, b)] for 0 < x < 1. For large shapes the
/// log-gamma values run to thousands, so their differences are formed
/// analytically rather than by subtraction.
fn ln_front(a: f64, b: f64, x: f64) -> f64 {
    let y = 1.0 - x;
    match (a >= STIRLING_MIN, b >= STIRLING_MIN) {
        (true, true) => {
            let s = a + b;
            // x s / a = 1 + t / a and y s / b = 1 − t / b
            let t = x * b - y * a;
            a * (t / a).ln_1p() + b * (-t / b).ln_1p() + 0.5 * (a * b / s).ln() - HALF_LN_2PI
                + stirling_correction(s)
                - stirling_correction(a)
                - stirling_correction(b)
        }
        (false, true) => small_large(a, b, x.ln(), (-x).ln_1p()),
        (true, false) => small_large(b, a, (-x).ln_1p(), x.ln()),
        (false, false) => {
            a * x.ln() + b * (-x).ln_1p() - (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))
        }
    }
}

// a < 10 ≤ b; `ln_x` pairs with a and `ln_y` with b.
fn small_large(a: f64, b: f64, ln_x: f64, ln_y: f64) -> f64 {
    let s = a + b;
    // ln Γ(a + b) − ln Γ(b) − a ln s
    let ratio = (b - 0.5) * (a / b).ln_1p() - a + stirling_correction(s) - stirling_correction(b);
    a * (ln_x + s.ln()) + b * ln_y - ln_gamma(a) + ratio
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(format!("beta argument must lie in [0, 1], got {x}")))
    }
}

/// Regularized incomplete beta ratio I_x(α, β).
pub fn beta_cdf(params: BetaParams, x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(incomplete_beta(params, x).0)
}

/// ln I_x(α, β), finite deep into the lower tail where I_x underflows.
pub fn ln_beta_cdf(params: BetaParams, x: f64) -> Result<f64> {
    check_unit(x)?;
    let BetaParams { alpha: a, beta: b } = params;
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if x == 1.0 {
        return Ok(0.0);
    }
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok((ln_front(a, b, x) - a.ln() + continued_fraction(a, b, x).ln()).min(0.0))
    } else {
        Ok((-incomplete_beta(params, x).1).ln_1p())
    }
}

/// ln of the Beta density; finite wherever the density is positive.
pub fn ln_beta_pdf(params: BetaParams, x: f64) -> Result<f64> {
    check_unit(x)?;
    if x == 0.0 || x == 1.0 {
        return beta_pdf(params, x).map(f64::ln);
    }
    Ok(ln_front(params.alpha, params.beta, x) - x.ln() - (-x).ln_1p())
}

/// Upper tail 1 − I_x(α, β), computed without cancellation.
pub fn beta_sf(params: BetaParams, x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(incomplete_beta(params, x).1)
}

pub fn beta_pdf(params: BetaParams, x: f64) -> Result<f64> {
    check_unit(x)?;
    let BetaParams { alpha, beta } = params;
    if x == 0.0 || x == 1.0 {
        let edge_shape = if x == 0.0 { alpha } else { beta };
        return Ok(if edge_shape < 1.0 {
            f64::INFINITY
        } else if edge_shape == 1.0 {
            (-params.ln_beta_fn()).exp()
        } else {
            0.0
        });
    }
    ln_beta_pdf(params, x).map(f64::exp)
}

/// (I_x(α, β), 1 − I_x(α, β)); the smaller of the two is evaluated directly
/// from the continued fraction.
pub(crate) fn incomplete_beta(params: BetaParams, x: f64) -> (f64, f64) {
    let BetaParams { alpha: a, beta: b } = params;
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0);
    }
    let ln_front = ln_front(a, b, x);
    if x < (a + 1.0) / (a + b + 2.0) {
        let lower = (ln_front.exp() / a * continued_fraction(a, b, x)).min(1.0);
        (lower, 1.0 - lower)
    } else {
        let upper = (ln_front.exp() / b * continued_fraction(b, a, 1.0 - x)).min(1.0);
        (1.0 - upper, upper)
    }
}

// Modified Lentz evaluation of the standard continued fraction for I_x(a, b).
fn continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// Smallest x with I_x(α, β) ≥ p: bisection on the incomplete beta ratio,
/// accelerated by Newton steps whenever they stay inside the bracket.
pub fn beta_quantile(params: BetaParams, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("beta quantile requires 0 < p < 1, got {p}")));
    }
    // Solve in the tail that keeps full relative precision.
    let upper_tail = p > 0.5;
    let target = if upper_tail { 1.0 - p } else { p };
    let residual = |x: f64| {
        let (lo, hi) = incomplete_beta(params, x);
        if upper_tail {
            target - hi
        } else {
            lo - target
        }
    };

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mean = params.alpha / (params.alpha + params.beta);
    let mut x = mean;
    for _ in 0..400 {
        let r = residual(x);
        if r == 0.0 {
            return Ok(x);
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let density = beta_pdf(params, x).unwrap_or(0.0);
        let newton = x - r / density;
        let next = if density > 0.0 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else if lo > 0.0 && hi / lo > 16.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs() || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64) -> BetaParams {
        BetaParams::new(a, b).unwrap()
    }

    #[test]
    fn uniform_case() {
        assert!((beta_cdf(params(1.0, 1.0), 0.3).unwrap() - 0.3).abs() < 1e-15);
        for &p in &[0.01, 0.3, 0.77] {
            assert!((beta_quantile(params(1.0, 1.0), p).unwrap() - p).abs() < 1e-14);
        }
    }

    #[test]
    fn polynomial_integration_oracle() {
        // I_0.4(3, 5) = 105 ∫₀^0.4 t²(1-t)⁴ dt; expand (1-t)⁴ and integrate termwise.
        let x: f64 = 0.4;
        let coeffs = [1.0, -4.0, 6.0, -4.0, 1.0];
        let integral: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * x.powi(j as i32 + 3) / (j as f64 + 3.0))
            .sum();
        let exact = 105.0 * integral;
        let v = beta_cdf(params(3.0, 5.0), 0.4).unwrap();
        assert!(((v - exact) / exact).abs() < 1e-12, "{v} vs {exact}");
        let sf = beta_sf(params(3.0, 5.0), 0.4).unwrap();
        assert!(((sf - (1.0 - exact)) / (1.0 - exact)).abs() < 1e-12);
    }

    #[test]
    fn worked_example_tail_probability() {
        // 1 - P_λ[X ≤ 1] for n = 1000 at λ = 1%: P[Y ≤ 0.01], Y ~ Beta(2, 999)
        let v = beta_cdf(params(2.0, 999.0), 0.01).unwrap();
        assert!((1.0 - v - 0.0005).abs() < 0.00005, "{}", 1.0 - v);
    }

    #[test]
    fn worked_example_quantiles() {
        let b = params(2.0, 999.0);
        let q95 = beta_quantile(b, 0.95).unwrap();
        let q50 = beta_quantile(b, 0.50).unwrap();
        assert!((q95 - 0.0047).abs() < 0.00005, "{q95}");
        assert!((q50 - 0.0017).abs() < 0.00005, "{q50}");
    }

    #[test]
    fn quantile_round_trip_grid() {
        for &(a, b) in &[(0.5, 0.5), (1.0, 3.0), (2.0, 999.0), (15.0, 54.0), (55.0, 53_576.0), (3.0, 1.5)] {
            for &p in &[1e-6, 0.01, 0.25, 0.5, 0.9, 0.999, 1.0 - 1e-9] {
                if a == 0.5 && p > 0.999 {
                    // The exact quantile, 1 − 2.5e-18, rounds to 1.
                    continue;
                }
                let q = beta_quantile(params(a, b), p).unwrap();
                let back = beta_cdf(params(a, b), q).unwrap();
                assert!((back - p).abs() < 1e-12, "({a}, {b}, {p}): {back}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(BetaParams::new(0.0, 1.0).is_err());
        assert!(BetaParams::new(1.0, -2.0).is_err());
        assert!(beta_cdf(params(1.0, 1.0), 1.2).is_err());
        assert!(beta_cdf(params(1.0, 1.0), -0.1).is_err());
        assert!(beta_quantile(params(1.0, 1.0), 1.0).is_err());
        assert!(beta_quantile(params(1.0, 1.0), 0.0).is_err());
    }
}
