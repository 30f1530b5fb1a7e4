use anyhow::{bail, Context};
use lowpd::correlated::{conservative_bayes_correlated, neutral_bayes_correlated, ucb_correlated, CorrelatedObservation};
use lowpd::data::{builtin_dataset, builtin_names};
use lowpd::distributions::{binomial_pmf, corr_binomial_pmf, CorrBinomialParams};
use lowpd::independent::{conservative_bayes_independent, neutral_bayes_independent, ucb_independent};
use lowpd::multi_period::{multi_run_report, CorrelationMode};
use lowpd::PortfolioObservation;
use serde::Serialize;

use crate::report::{
    ConstraintValue, EstimateReport, Estimates, LevelValue, MultiPeriodReport, OnePeriodReport, Summary,
};
use crate::settings::{Mode, RunConfig};

/// Timestamp in the style "Sun Apr 01 18:38:09 2012".
fn now() -> String {
    chrono::Local::now().format("%a %b %d %H:%M:%S %Y").to_string()
}

pub fn cmd_estimate(config: &RunConfig) -> anyhow::Result<EstimateReport> {
    let data = config.source.load()?;
    let series = &data.series;
    let summary = Summary {
        periods: series.periods(),
        obligor_years: series.obligor_years(),
        total_defaults: series.total_defaults(),
        naive_pd: series.naive_estimate(),
    };

    let estimates = match config.mode {
        Mode::OnePeriodIndependent | Mode::OnePeriodCorrelated => {
            if series.periods() > 1 && !config.pool {
                bail!(
                    "{} periods of data given; one-period modes need a single period or --pool",
                    series.periods()
                );
            }
            let obs = PortfolioObservation::new(series.obligor_years(), series.total_defaults())?;
            Estimates::OnePeriod(one_period(obs, config)?)
        }
        Mode::MultiPeriod => {
            let sim = &config.simulation;
            let estimated = multi_run_report(series, CorrelationMode::Estimated, sim, config.execution)
                .context("estimation with estimated correlations")?;
            let predefined = config
                .correlation
                .map(|p| multi_run_report(series, CorrelationMode::Predefined(p), sim, config.execution))
                .transpose()
                .context("estimation with pre-defined correlations")?;
            Estimates::MultiPeriod(Box::new(MultiPeriodReport { simulation: sim.clone(), estimated, predefined }))
        }
    };

    Ok(EstimateReport {
        timestamp: config.timestamp.then(now),
        dataset: data.title,
        mode: config.mode,
        summary,
        estimates,
    })
}

fn one_period(obs: PortfolioObservation, config: &RunConfig) -> anyhow::Result<OnePeriodReport> {
    match config.correlation {
        None => Ok(OnePeriodReport {
            rho: None,
            upper_bounds: config
                .levels
                .iter()
                .map(|&level| LevelValue { level, value: ucb_independent(obs, level) })
                .collect(),
            neutral_bayes: config
                .constraints
                .iter()
                .map(|&c| ConstraintValue { u: c.upper(), value: neutral_bayes_independent(obs, c) })
                .collect(),
            conservative_bayes: conservative_bayes_independent(obs),
        }),
        Some(p) => {
            let cobs = CorrelatedObservation::new(obs, p.rho())?;
            let upper_bounds = config
                .levels
                .iter()
                .map(|&level| Ok(LevelValue { level, value: ucb_correlated(cobs, level)? }))
                .collect::<anyhow::Result<Vec<_>>>()?;
            Ok(OnePeriodReport {
                rho: Some(p.rho()),
                upper_bounds,
                neutral_bayes: config
                    .constraints
                    .iter()
                    .map(|&c| ConstraintValue { u: c.upper(), value: neutral_bayes_correlated(cobs, c) })
                    .collect(),
                conservative_bayes: conservative_bayes_correlated(cobs),
            })
        }
    }
}

/// Mass left out of the distribution comparison table.
pub const COMPARE_TAIL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmfRow {
    pub k: u64,
    pub binomial: f64,
    pub correlated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionComparison {
    pub n: u64,
    pub lambda: f64,
    pub rho: f64,
    pub rows: Vec<PmfRow>,
}

/// Binomial and correlated binomial pmfs side by side, up to the first k
/// where both cumulative sums reach 1 − 1e-9.
pub fn cmd_compare_distributions(n: u64, lambda: f64, rho: f64) -> anyhow::Result<DistributionComparison> {
    let params = CorrBinomialParams::new(n, lambda, rho)?;
    let mut rows = Vec::new();
    let (mut cum_b, mut cum_c) = (0.0, 0.0);
    for k in 0..=n {
        let row = PmfRow {
            k,
            binomial: binomial_pmf(n, lambda, k),
            correlated: corr_binomial_pmf(params, k as i64)?,
        };
        cum_b += row.binomial;
        cum_c += row.correlated;
        rows.push(row);
        if cum_b >= 1.0 - COMPARE_TAIL && cum_c >= 1.0 - COMPARE_TAIL {
            break;
        }
    }
    Ok(DistributionComparison { n, lambda, rho, rows })
}

impl std::fmt::Display for DistributionComparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Binomial and correlated binomial distributions")?;
        writeln!(f, "n = {}, PD = {}, asset correlation = {}", self.n, self.lambda, self.rho)?;
        writeln!(f, "{:>6}  {:>14}  {:>14}", "k", "binomial", "correlated")?;
        for r in &self.rows {
            writeln!(f, "{:>6}  {:>14.6e}  {:>14.6e}", r.k, r.binomial, r.correlated)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub name: &'static str,
    pub title: &'static str,
    pub periods: usize,
    pub obligor_years: u64,
    pub defaults: u64,
    pub description: &'static str,
    pub source: &'static str,
}

impl std::fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let plural = if self.defaults == 1 { "" } else { "s" };
        write!(
            f,
            "{} (T={}, {} obligor-years, {} default{plural})",
            self.name, self.periods, self.obligor_years, self.defaults
        )
    }
}

pub fn cmd_datasets() -> Vec<DatasetSummary> {
    builtin_names()
        .map(|name| {
            let d = builtin_dataset(name).expect("listed datasets exist");
            DatasetSummary {
                name: d.name,
                title: d.title,
                periods: d.series.periods(),
                obligor_years: d.series.obligor_years(),
                defaults: d.series.total_defaults(),
                description: d.description,
                source: d.source,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn datasets_listing() {
        let lines: Vec<String> = cmd_datasets().iter().map(ToString::to_string).collect();
        assert!(lines.contains(&"fictitious (T=8, 1000 obligor-years, 1 default)".to_string()));
        assert!(lines.contains(&"moodys_investment_grade (T=21, 53630 obligor-years, 54 defaults)".to_string()));
    }

    #[test]
    fn uncorrelated_columns_identical() {
        let c = cmd_compare_distributions(200, 0.02, 0.0).unwrap();
        for r in &c.rows {
            assert!((r.binomial - r.correlated).abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn columns_sum_to_one() {
        let c = cmd_compare_distributions(1000, 0.01, 0.18).unwrap();
        let b: f64 = c.rows.iter().map(|r| r.binomial).sum();
        let s: f64 = c.rows.iter().map(|r| r.correlated).sum();
        assert!((b - 1.0).abs() < COMPARE_TAIL, "{b}");
        assert!((s - 1.0).abs() < COMPARE_TAIL, "{s}");
    }

    #[test]
    fn correlation_widens_the_distribution() {
        let c = cmd_compare_distributions(1000, 0.01, 0.18).unwrap();
        let var = |pick: fn(&PmfRow) -> f64| {
            let mean: f64 = c.rows.iter().map(|r| r.k as f64 * pick(r)).sum();
            c.rows.iter().map(|r| (r.k as f64 - mean).powi(2) * pick(r)).sum::<f64>()
        };
        assert!(var(|r| r.correlated) > 10.0 * var(|r| r.binomial));
    }
}
