use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Correlation matrix of the systemic factors, entries ϑ^|t−τ|.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorCorrelation {
    dim: usize,
    entries: Vec<f64>,
}

impl FactorCorrelation {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }
}

pub fn build_sigma(theta: f64, periods: usize) -> Result<FactorCorrelation> {
    check_theta(theta)?;
    if periods == 0 {
        return Err(Error::domain("the number of periods must be positive"));
    }
    let entries = (0..periods)
        .flat_map(|r| (0..periods).map(move |c| theta.powi(r.abs_diff(c) as i32)))
        .collect();
    Ok(FactorCorrelation { dim: periods, entries })
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::domain(format!("time correlation must lie in [0, 1), got {theta}")))
    }
}

/// Independent standard normal innovations, `n_iter` rows of `periods`
/// values. Holding these fixed while varying ϑ gives common random numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalDraws {
    periods: usize,
    z: Vec<f64>,
}

impl NormalDraws {
    /// Draws from the ChaCha20 stream `stream` of generator `seed`.
    pub fn generate(periods: usize, n_iter: usize, seed: u64, stream: u64) -> Result<Self> {
        if periods == 0 || n_iter == 0 {
            return Err(Error::domain("factor sample needs at least one period and one draw"));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let z = (0..periods * n_iter).map(|_| rng.sample(StandardNormal)).collect();
        Ok(NormalDraws { periods, z })
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn n_iter(&self) -> usize {
        self.z.len() / self.periods
    }

    /// Factor paths with corr[S_t, S_τ] = ϑ^|t−τ|, via
    /// S_1 = Z_1 and S_t = ϑ S_{t−1} + √(1 − ϑ²) Z_t.
    pub fn factors(&self, theta: f64) -> Result<SystemicFactorSample> {
        check_theta(theta)?;
        let innovation = (1.0 - theta * theta).sqrt();
        let mut draws = Vec::with_capacity(self.z.len());
        for row in self.z.chunks_exact(self.periods) {
            let mut s = row[0];
            draws.push(s);
            for &z in &row[1..] {
                s = theta * s + innovation * z;
                draws.push(s);
            }
        }
        Ok(SystemicFactorSample {
            periods: self.periods,
            theta,
            draws,
        })
    }
}

/// Realised systemic factor paths, one row of length T per draw.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemicFactorSample {
    periods: usize,
    theta: f64,
    draws: Vec<f64>,
}

impl SystemicFactorSample {
    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n_iter(&self) -> usize {
        self.draws.len() / self.periods
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.draws.chunks_exact(self.periods)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.draws[i * self.periods..(i + 1) * self.periods]
    }
}

/// `n_iter` factor paths over `periods` years with time correlation ϑ.
pub fn sample_systemic_factors(theta: f64, periods: usize, n_iter: usize, seed: u64) -> Result<SystemicFactorSample> {
    NormalDraws::generate(periods, n_iter, seed, 0)?.factors(theta)
}
