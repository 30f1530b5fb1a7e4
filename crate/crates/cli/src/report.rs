//! Report model and its text rendering. Structured output is the serde
//! form of [`EstimateReport`] with probabilities at full precision.

use std::fmt::{self, Write};

use lowpd::multi_period::{Estimate, ModeReport, SimulationConfig};
use lowpd::{ConfidenceLevel, BPS};
use serde::Serialize;

use crate::settings::Mode;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub periods: usize,
    pub obligor_years: u64,
    pub total_defaults: u64,
    pub naive_pd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelValue {
    pub level: ConfidenceLevel,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintValue {
    pub u: f64,
    pub value: f64,
}

/// One-period estimates, all as probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OnePeriodReport {
    pub rho: Option<f64>,
    pub upper_bounds: Vec<LevelValue>,
    pub neutral_bayes: Vec<ConstraintValue>,
    pub conservative_bayes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiPeriodReport {
    pub simulation: SimulationConfig,
    pub estimated: ModeReport,
    pub predefined: Option<ModeReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimates {
    OnePeriod(OnePeriodReport),
    MultiPeriod(Box<MultiPeriodReport>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub timestamp: Option<String>,
    pub dataset: String,
    pub mode: Mode,
    pub summary: Summary,
    pub estimates: Estimates,
}

impl EstimateReport {
    /// Estimators that did not produce a value.
    pub fn failures(&self) -> Vec<String> {
        match &self.estimates {
            Estimates::OnePeriod(_) => Vec::new(),
            Estimates::MultiPeriod(m) => {
                let mut out = m.estimated.failures();
                if let Some(p) = &m.predefined {
                    out.extend(p.failures().into_iter().map(|f| format!("pre-defined correlations, {f}")));
                }
                out
            }
        }
    }
}

/// R-style short number: one decimal, trailing ".0" dropped.
fn short(x: f64) -> String {
    let r = (x * 10.0).round() / 10.0;
    format!("{r}")
}

/// Level header cell such as "50" or "99.9".
fn percent_label(level: ConfidenceLevel) -> String {
    let p = (level.gamma() * 1e6).round() / 1e4;
    format!("{p}")
}

const LABEL_WIDTH: usize = 17;

fn table_row(out: &mut String, label: &str, width: usize, cells: impl Iterator<Item = String>) {
    let _ = write!(out, "{label:<LABEL_WIDTH$}");
    for c in cells {
        let _ = write!(out, " & {c:>width$}");
    }
    out.push('\n');
}

fn estimate_cell(e: &Estimate, scale: f64, pick: fn(&lowpd::multi_period::RunStats) -> f64) -> String {
    match e.value() {
        Some(s) => format!("{:5.1}", pick(&s) * scale),
        None => "failed".to_string(),
    }
}

/// `label` includes its unit, e.g. "ML estimate for PD (bps)".
fn estimate_lines(out: &mut String, label: &str, unit: &str, scale: f64, e: &Estimate) {
    let _ = writeln!(out, "{label}: {}", estimate_cell(e, scale, |s| s.mean));
    let _ = writeln!(out, "Standard deviation ({unit}): {}", estimate_cell(e, scale, |s| s.std_dev));
}

fn mode_block(out: &mut String, r: &ModeReport, predefined: bool) {
    if predefined {
        out.push_str("Estimates with pre-defined correlations:\n");
        if let Some(p) = r.deployed {
            let _ = writeln!(out, "Asset correlation (%): {:5.1}", p.rho() * 100.0);
            let _ = writeln!(out, "Time correlation deployed (%): {:5.1}", p.theta() * 100.0);
        }
        estimate_lines(out, "ML estimate for PD (bps) only", "bps", BPS, &r.ml_lambda);
    } else {
        out.push_str("Estimates with estimated correlations:\n");
        estimate_lines(out, "ML estimate for PD (bps)", "bps", BPS, &r.ml_lambda);
        if let Some(e) = &r.ml_rho {
            estimate_lines(out, "ML estimate for rho (%)", "%", 100.0, e);
        }
        if let Some(e) = &r.ml_theta {
            estimate_lines(out, "ML estimate for theta (%)", "%", 100.0, e);
        }
    }
    out.push('\n');
    table_row(out, "Conf. level (%)", 4, r.bounds.iter().map(|b| percent_label(b.level)));
    table_row(
        out,
        "Upper bound (bps)",
        4,
        r.bounds.iter().map(|b| estimate_cell(&b.estimate, BPS, |s| s.mean).trim().to_string()),
    );
    table_row(
        out,
        "Std. dev. (bps)",
        4,
        r.bounds.iter().map(|b| estimate_cell(&b.estimate, BPS, |s| s.std_dev).trim().to_string()),
    );
    out.push('\n');
    estimate_lines(out, "Bayesian neutral estimate for PD (bps)", "bps", BPS, &r.bayes_neutral);
    estimate_lines(out, "Bayesian constrained estimate for PD (bps)", "bps", BPS, &r.bayes_constrained);
    estimate_lines(out, "Bayesian conservative estimate for PD (bps)", "bps", BPS, &r.bayes_conservative);
}

fn render_multi(out: &mut String, report: &EstimateReport, m: &MultiPeriodReport) {
    let c = &m.simulation;
    out.push_str("Multiperiod low default estimation\n");
    let _ = writeln!(out, "{}\n", report.dataset);
    let _ = writeln!(out, "Random seed: {}", c.seed);
    let _ = writeln!(out, "Number of ML simulation iterations: {}", c.ml_iterations);
    let _ = writeln!(out, "Number of ML simulation runs: {}", c.ml_runs);
    let _ = writeln!(out, "Number of confidence bounds simulation iterations: {}", c.bound_iterations);
    let _ = writeln!(out, "Number of confidence bounds simulation runs: {}", c.bound_runs);
    let _ = writeln!(out, "Number of inner Bayesian simulation iterations: {}", c.bayes_iterations);
    let _ = writeln!(out, "Number of outer Bayesian steps: {}", c.bayes_steps);
    let _ = writeln!(out, "Number of Bayesian simulation runs: {}", c.bayes_runs);
    let s = &report.summary;
    let _ = writeln!(out, "Length of time period: {}", s.periods);
    let _ = writeln!(out, "Total number of obligor-years: {}", s.obligor_years);
    let _ = writeln!(out, "Total observed number of defaults: {}", s.total_defaults);
    let _ = writeln!(out, "Naive PD estimate (bps): {}\n", short(s.naive_pd * BPS));
    mode_block(out, &m.estimated, false);
    if let Some(p) = &m.predefined {
        out.push('\n');
        mode_block(out, p, true);
    }
}

fn pct(x: f64) -> String {
    format!("{:.4}", x * 100.0)
}

fn render_one(out: &mut String, report: &EstimateReport, r: &OnePeriodReport) {
    let kind = if r.rho.is_some() { "correlated" } else { "independent" };
    let _ = writeln!(out, "One-period low default estimation ({kind} defaults)");
    let _ = writeln!(out, "{}\n", report.dataset);
    let s = &report.summary;
    if s.periods > 1 {
        let _ = writeln!(out, "Periods pooled: {}", s.periods);
    }
    let _ = writeln!(out, "Number of obligors: {}", s.obligor_years);
    let _ = writeln!(out, "Number of defaults: {}", s.total_defaults);
    if let Some(rho) = r.rho {
        let _ = writeln!(out, "Asset correlation (%): {}", short(rho * 100.0));
    }
    let _ = writeln!(out, "Naive PD estimate (%): {}\n", pct(s.naive_pd));
    table_row(out, "Conf. level (%)", 7, r.upper_bounds.iter().map(|b| percent_label(b.level)));
    table_row(out, "Upper bound (%)", 7, r.upper_bounds.iter().map(|b| pct(b.value)));
    out.push('\n');
    for n in &r.neutral_bayes {
        let _ = writeln!(out, "Neutral Bayesian estimate on (0, {}) (%): {}", n.u, pct(n.value));
    }
    let _ = writeln!(out, "Conservative Bayesian estimate (%): {}", pct(r.conservative_bayes));
}

impl fmt::Display for EstimateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        if let Some(t) = &self.timestamp {
            let _ = writeln!(out, "{t}");
        }
        match &self.estimates {
            Estimates::OnePeriod(r) => render_one(&mut out, self, r),
            Estimates::MultiPeriod(m) => render_multi(&mut out, self, m),
        }
        f.write_str(&out)
    }
}
