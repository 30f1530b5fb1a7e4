use serde::{Deserialize, Serialize};

use super::{ucb_multi, mle_fit, mle_fit_lambda, CorrelationParams, GridConfig, MleResult, NormalDraws, PosteriorGrid};
use crate::data::DefaultTimeSeries;
use crate::{ConfidenceLevel, Error, Execution, Result};

/// Random stream purposes; each run r of purpose p draws from ChaCha20
/// stream (p << 32) | r of the configured seed.
#[derive(Debug, Clone, Copy)]
enum Purpose {
    MaximumLikelihood = 1,
    Bounds = 2,
    Bayes = 3,
}

fn stream(purpose: Purpose, run: usize) -> u64 {
    ((purpose as u64) << 32) | run as u64
}

/// Monte-Carlo sizes for a full multi-period estimation. Missing fields
/// deserialize to the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub seed: u64,
    pub ml_iterations: usize,
    pub ml_runs: usize,
    pub bound_iterations: usize,
    pub bound_runs: usize,
    pub bayes_iterations: usize,
    pub bayes_steps: usize,
    pub bayes_runs: usize,
    pub levels: Vec<ConfidenceLevel>,
    /// Grid endpoint standing in for the unconstrained Bayesian estimators.
    pub unconstrained_u: f64,
    /// The constrained neutral estimator uses the mean upper bound at this level.
    pub constraint_level: ConfidenceLevel,
}

pub const MIN_ITERATIONS: usize = 100;

pub fn default_levels() -> Vec<ConfidenceLevel> {
    [0.5, 0.75, 0.9, 0.95, 0.99, 0.999]
        .into_iter()
        .map(|g| ConfidenceLevel::new(g).expect("valid default level"))
        .collect()
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            seed: 36,
            ml_iterations: 10_000,
            ml_runs: 16,
            bound_iterations: 10_000,
            bound_runs: 16,
            bayes_iterations: 1000,
            bayes_steps: 2500,
            bayes_runs: 16,
            levels: default_levels(),
            unconstrained_u: 0.1,
            constraint_level: ConfidenceLevel::new(0.99).expect("valid level"),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("ML iterations", self.ml_iterations),
            ("confidence bound iterations", self.bound_iterations),
            ("inner Bayesian iterations", self.bayes_iterations),
        ] {
            if n < MIN_ITERATIONS {
                return Err(Error::Config(format!("{name} must be at least {MIN_ITERATIONS}, got {n}")));
            }
        }
        for (name, n) in [
            ("ML runs", self.ml_runs),
            ("confidence bound runs", self.bound_runs),
            ("Bayesian runs", self.bayes_runs),
        ] {
            if n == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.levels.is_empty() {
            return Err(Error::Config("at least one confidence level is required".into()));
        }
        GridConfig::new(self.bayes_steps, self.unconstrained_u)?;
        Ok(())
    }
}

/// Mean over runs and the standard deviation of that mean (sample standard
/// deviation of the run values divided by √runs; 0 for a single run).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub mean: f64,
    pub std_dev: f64,
    pub runs: usize,
}

impl RunStats {
    pub fn from_runs(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_dev = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        RunStats { mean, std_dev, runs: n }
    }
}

/// Result of one estimator: statistics over runs, or the first failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    Value(RunStats),
    Failed(String),
}

impl Estimate {
    fn collect(values: Vec<Result<f64>>) -> Self {
        match values.into_iter().collect::<Result<Vec<f64>>>() {
            Ok(v) => Estimate::Value(RunStats::from_runs(&v)),
            Err(e) => Estimate::Failed(e.to_string()),
        }
    }

    fn failed(reason: &str) -> Self {
        Estimate::Failed(reason.to_string())
    }

    pub fn value(&self) -> Option<RunStats> {
        match self {
            Estimate::Value(s) => Some(*s),
            Estimate::Failed(_) => None,
        }
    }

    pub fn mean(&self) -> Option<f64> {
        self.value().map(|s| s.mean)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CorrelationMode {
    /// (λ, ϱ, ϑ) estimated jointly; bounds and Bayesian estimates then use
    /// the mean estimated ϱ and ϑ.
    Estimated,
    Predefined(CorrelationParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEstimate {
    pub level: ConfidenceLevel,
    pub estimate: Estimate,
}

/// One block of estimates for a correlation mode, all PDs as probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub mode: CorrelationMode,
    pub ml_lambda: Estimate,
    /// Present in estimated mode only.
    pub ml_rho: Option<Estimate>,
    pub ml_theta: Option<Estimate>,
    pub ml_converged_runs: usize,
    /// Correlations used for the bounds and the Bayesian estimators.
    pub deployed: Option<CorrelationParams>,
    pub bounds: Vec<BoundEstimate>,
    pub constraint_u: Option<f64>,
    pub bayes_neutral: Estimate,
    pub bayes_constrained: Estimate,
    pub bayes_conservative: Estimate,
}

impl ModeReport {
    pub fn failures(&self) -> Vec<String> {
        let mut all: Vec<(&str, &Estimate)> = vec![("ML estimate for PD", &self.ml_lambda)];
        if let Some(e) = &self.ml_rho {
            all.push(("ML estimate for rho", e));
        }
        if let Some(e) = &self.ml_theta {
            all.push(("ML estimate for theta", e));
        }
        let labels: Vec<String> = self.bounds.iter().map(|b| format!("upper bound at {}", b.level.gamma())).collect();
        for (b, label) in self.bounds.iter().zip(&labels) {
            all.push((label, &b.estimate));
        }
        all.push(("Bayesian neutral estimate", &self.bayes_neutral));
        all.push(("Bayesian constrained estimate", &self.bayes_constrained));
        all.push(("Bayesian conservative estimate", &self.bayes_conservative));
        all.into_iter()
            .filter_map(|(name, e)| match e {
                Estimate::Failed(msg) => Some(format!("{name}: {msg}")),
                Estimate::Value(_) => None,
            })
            .collect()
    }
}

/// Runs every multi-period estimator in one correlation mode.
pub fn multi_run_report(
    data: &DefaultTimeSeries,
    mode: CorrelationMode,
    config: &SimulationConfig,
    exec: Execution,
) -> Result<ModeReport> {
    config.validate()?;
    let periods = data.periods();

    let fits: Vec<Result<MleResult>> = exec.map_range(config.ml_runs, |run| {
        let draws = NormalDraws::generate(periods, config.ml_iterations, config.seed, stream(Purpose::MaximumLikelihood, run))?;
        match mode {
            CorrelationMode::Estimated => mle_fit(data, &draws),
            CorrelationMode::Predefined(p) => mle_fit_lambda(data, p, &draws.factors(p.theta())?),
        }
    });
    let ml_converged_runs = fits.iter().filter(|f| matches!(f, Ok(r) if r.converged)).count();
    let field = |get: fn(&MleResult) -> f64| Estimate::collect(fits.iter().map(|f| f.clone().map(|r| get(&r))).collect());
    let ml_lambda = field(|r| r.lambda_hat);
    let (ml_rho, ml_theta) = match mode {
        CorrelationMode::Estimated => (Some(field(|r| r.rho_hat)), Some(field(|r| r.theta_hat))),
        CorrelationMode::Predefined(_) => (None, None),
    };

    let deployed = match mode {
        CorrelationMode::Predefined(p) => Some(p),
        CorrelationMode::Estimated => match (ml_rho.as_ref().and_then(Estimate::mean), ml_theta.as_ref().and_then(Estimate::mean)) {
            (Some(rho), Some(theta)) => Some(CorrelationParams::new(rho, theta)?),
            _ => None,
        },
    };
    let Some(params) = deployed else {
        let reason = "correlations could not be estimated";
        return Ok(ModeReport {
            mode,
            ml_lambda,
            ml_rho,
            ml_theta,
            ml_converged_runs,
            deployed,
            bounds: config
                .levels
                .iter()
                .map(|&level| BoundEstimate { level, estimate: Estimate::failed(reason) })
                .collect(),
            constraint_u: None,
            bayes_neutral: Estimate::failed(reason),
            bayes_constrained: Estimate::failed(reason),
            bayes_conservative: Estimate::failed(reason),
        });
    };

    // The constraint level is solved alongside the reported levels on the
    // same samples but only reported if requested.
    let mut solve_levels = config.levels.clone();
    if !solve_levels.contains(&config.constraint_level) {
        solve_levels.push(config.constraint_level);
    }
    let per_run: Vec<Result<Vec<Result<f64>>>> = exec.map_range(config.bound_runs, |run| {
        let draws = NormalDraws::generate(periods, config.bound_iterations, config.seed, stream(Purpose::Bounds, run))?;
        let sample = draws.factors(params.theta())?;
        Ok(solve_levels.iter().map(|&level| ucb_multi(data, params, level, &sample)).collect())
    });
    let level_estimate = |idx: usize| {
        Estimate::collect(
            per_run
                .iter()
                .map(|r| r.as_ref().map_err(Clone::clone).and_then(|v| v[idx].clone()))
                .collect(),
        )
    };
    let bounds: Vec<BoundEstimate> = config
        .levels
        .iter()
        .enumerate()
        .map(|(i, &level)| BoundEstimate { level, estimate: level_estimate(i) })
        .collect();
    let constraint_idx = solve_levels.iter().position(|l| *l == config.constraint_level).expect("pushed above");
    let constraint_u = level_estimate(constraint_idx).mean();

    let unconstrained = GridConfig::new(config.bayes_steps, config.unconstrained_u)?;
    let constrained = match constraint_u {
        Some(u) => Some(GridConfig::new(config.bayes_steps, u.min(1.0))?),
        None => None,
    };
    let bayes: Vec<Result<(f64, f64, Option<f64>)>> = exec.map_range(config.bayes_runs, |run| {
        let draws = NormalDraws::generate(periods, config.bayes_iterations, config.seed, stream(Purpose::Bayes, run))?;
        let sample = draws.factors(params.theta())?;
        let full = PosteriorGrid::evaluate(data, params.rho(), unconstrained, &sample, Execution::Serial)?;
        let restricted = constrained
            .map(|g| PosteriorGrid::evaluate(data, params.rho(), g, &sample, Execution::Serial).map(|p| p.neutral()))
            .transpose()?;
        Ok((full.neutral(), full.conservative(), restricted))
    });
    let bayes_neutral = Estimate::collect(bayes.iter().map(|r| r.clone().map(|v| v.0)).collect());
    let bayes_conservative = Estimate::collect(bayes.iter().map(|r| r.clone().map(|v| v.1)).collect());
    let bayes_constrained = if constrained.is_some() {
        Estimate::collect(bayes.iter().map(|r| r.clone().map(|v| v.2.expect("constrained grid evaluated"))).collect())
    } else {
        Estimate::failed("the constraining upper bound could not be computed")
    };

    Ok(ModeReport {
        mode,
        ml_lambda,
        ml_rho,
        ml_theta,
        ml_converged_runs,
        deployed,
        bounds,
        constraint_u,
        bayes_neutral,
        bayes_constrained,
        bayes_conservative,
    })
}
