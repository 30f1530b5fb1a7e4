//! Estimation settings from flags and an optional TOML file. A flag always
//! wins over the file; anything left unset falls back to the defaults below.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use lowpd::data::{builtin_dataset, parse_csv, DefaultTimeSeries};
use lowpd::multi_period::{default_levels, CorrelationParams, SimulationConfig};
use lowpd::{ConfidenceLevel, Execution, PriorConstraint};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    OnePeriodIndependent,
    OnePeriodCorrelated,
    MultiPeriod,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::OnePeriodIndependent => "one-period-independent",
            Mode::OnePeriodCorrelated => "one-period-correlated",
            Mode::MultiPeriod => "multi-period",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    /// Pretty-printed JSON.
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionArg {
    Serial,
    Parallel,
}

impl From<ExecutionArg> for Execution {
    fn from(e: ExecutionArg) -> Self {
        match e {
            ExecutionArg::Serial => Execution::Serial,
            ExecutionArg::Parallel => Execution::Parallel,
        }
    }
}

/// Unresolved settings. The same struct parses flags and the config file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// TOML file with any of the settings below (snake_case keys).
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Estimation regime.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,

    /// CSV file with columns year,pool_size,defaults.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["builtin", "pool_size"])]
    pub data: Option<PathBuf>,

    /// Bundled dataset (see `lowpd datasets`).
    #[arg(long, value_name = "NAME", conflicts_with = "pool_size")]
    pub builtin: Option<String>,

    /// Single-period pool size n.
    #[arg(long, requires = "defaults")]
    pub pool_size: Option<u64>,

    /// Single-period default count k.
    #[arg(long, requires = "pool_size")]
    pub defaults: Option<u64>,

    /// Pool a multi-year series into one period for the one-period modes.
    #[arg(long)]
    pub pool: bool,

    /// Asset correlation. Required for one-period-correlated; in
    /// multi-period mode, together with --theta, adds a pre-defined block.
    #[arg(long)]
    pub rho: Option<f64>,

    /// Time correlation for the pre-defined multi-period block.
    #[arg(long)]
    pub theta: Option<f64>,

    /// Confidence levels, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub levels: Option<Vec<f64>>,

    /// Uniform prior upper ends u. One-period modes accept a list; the
    /// multi-period mode takes one value, the stand-in for u = 1.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub constraint_u: Option<Vec<f64>>,

    /// Monte-Carlo iterations per ML and confidence bound run.
    #[arg(long)]
    pub iterations: Option<usize>,

    /// Inner Monte-Carlo iterations per Bayesian run.
    #[arg(long)]
    pub bayes_iterations: Option<usize>,

    /// Runs per estimator.
    #[arg(long)]
    pub runs: Option<usize>,

    /// Outer grid steps m of the Bayesian estimators.
    #[arg(long)]
    pub grid_steps: Option<usize>,

    /// Master seed for every random stream.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Report format.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,

    /// Spread simulation runs over threads or keep them on one.
    #[arg(long, value_enum)]
    pub execution: Option<ExecutionArg>,

    /// Omit the timestamp so repeated runs give identical output.
    #[arg(long)]
    #[serde(skip)]
    pub no_timestamp: bool,

    /// File-only switch matching --no-timestamp.
    #[arg(skip)]
    pub timestamp: Option<bool>,
}

impl Settings {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads --config if given and layers the flags over it.
    pub fn load(self) -> anyhow::Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let mut file = Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let Some(data) = &file.data {
            if data.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                file.data = Some(base.join(data));
            }
        }
        Ok(self.over(file))
    }

    /// Field-wise `self` if set, else `base`.
    pub fn over(self, base: Settings) -> Settings {
        let source_given = self.data.is_some() || self.builtin.is_some() || self.pool_size.is_some();
        let (data, builtin, pool_size, defaults) = if source_given {
            (self.data, self.builtin, self.pool_size, self.defaults)
        } else {
            (base.data, base.builtin, base.pool_size, base.defaults)
        };
        Settings {
            config: self.config,
            mode: self.mode.or(base.mode),
            data,
            builtin,
            pool_size,
            defaults,
            pool: self.pool || base.pool,
            rho: self.rho.or(base.rho),
            theta: self.theta.or(base.theta),
            levels: self.levels.or(base.levels),
            constraint_u: self.constraint_u.or(base.constraint_u),
            iterations: self.iterations.or(base.iterations),
            bayes_iterations: self.bayes_iterations.or(base.bayes_iterations),
            runs: self.runs.or(base.runs),
            grid_steps: self.grid_steps.or(base.grid_steps),
            seed: self.seed.or(base.seed),
            format: self.format.or(base.format),
            execution: self.execution.or(base.execution),
            no_timestamp: self.no_timestamp || base.no_timestamp,
            timestamp: self.timestamp.or(base.timestamp),
        }
    }

    pub fn resolve(self) -> anyhow::Result<RunConfig> {
        let mode = self.mode.unwrap_or(Mode::MultiPeriod);
        let source = match (&self.data, &self.builtin, self.pool_size, self.defaults) {
            (Some(path), None, None, _) => DataSource::File(path.clone()),
            (None, Some(name), None, _) => DataSource::Builtin(name.clone()),
            (None, None, Some(n), Some(k)) => DataSource::Counts { pool_size: n, defaults: k },
            (None, None, None, None) => bail!("no data given; use --data, --builtin or --pool-size with --defaults"),
            _ => bail!("give exactly one of --data, --builtin or --pool-size with --defaults"),
        };

        let correlation = match (mode, self.rho, self.theta) {
            (Mode::OnePeriodIndependent, None, None) => None,
            (Mode::OnePeriodIndependent, _, _) => bail!("one-period-independent takes no correlations"),
            (Mode::OnePeriodCorrelated, Some(rho), None) => Some(CorrelationParams::new(rho, 0.0)?),
            (Mode::OnePeriodCorrelated, None, _) => bail!("one-period-correlated requires --rho"),
            (Mode::OnePeriodCorrelated, Some(_), Some(_)) => bail!("--theta applies to multi-period mode only"),
            (Mode::MultiPeriod, Some(rho), Some(theta)) => Some(CorrelationParams::new(rho, theta)?),
            (Mode::MultiPeriod, None, None) => None,
            (Mode::MultiPeriod, _, _) => bail!("pre-defined correlations need both --rho and --theta"),
        };

        let levels = match self.levels {
            Some(v) => v.into_iter().map(ConfidenceLevel::new).collect::<Result<Vec<_>, _>>()?,
            None if mode == Mode::MultiPeriod => default_levels(),
            None => [0.5, 0.75, 0.9].into_iter().map(ConfidenceLevel::new).collect::<Result<Vec<_>, _>>()?,
        };
        if levels.is_empty() {
            bail!("at least one confidence level is required");
        }

        let default_u: &[f64] = match mode {
            Mode::OnePeriodIndependent => &[0.025, 0.05, 0.1, 1.0],
            Mode::OnePeriodCorrelated => &[0.01, 0.1, 0.25, 1.0],
            Mode::MultiPeriod => &[0.1],
        };
        let constraints = self
            .constraint_u
            .unwrap_or_else(|| default_u.to_vec())
            .into_iter()
            .map(PriorConstraint::new)
            .collect::<Result<Vec<_>, _>>()?;
        if constraints.is_empty() {
            bail!("at least one prior constraint is required");
        }

        let mut simulation = SimulationConfig::default();
        if mode == Mode::MultiPeriod {
            let [u] = constraints.as_slice() else {
                bail!("multi-period mode takes a single --constraint-u");
            };
            simulation.unconstrained_u = u.upper();
            simulation.levels = levels.clone();
            if let Some(seed) = self.seed {
                simulation.seed = seed;
            }
            if let Some(n) = self.iterations {
                simulation.ml_iterations = n;
                simulation.bound_iterations = n;
            }
            if let Some(n) = self.bayes_iterations {
                simulation.bayes_iterations = n;
            }
            if let Some(r) = self.runs {
                simulation.ml_runs = r;
                simulation.bound_runs = r;
                simulation.bayes_runs = r;
            }
            if let Some(m) = self.grid_steps {
                simulation.bayes_steps = m;
            }
            simulation.validate()?;
        } else if self.iterations.is_some()
            || self.bayes_iterations.is_some()
            || self.runs.is_some()
            || self.grid_steps.is_some()
            || self.seed.is_some()
        {
            bail!("simulation settings apply to multi-period mode only");
        }

        Ok(RunConfig {
            mode,
            source,
            pool: self.pool,
            correlation,
            levels,
            constraints,
            simulation,
            format: self.format.unwrap_or_default(),
            execution: self.execution.map(Execution::from).unwrap_or_default(),
            timestamp: !self.no_timestamp && self.timestamp.unwrap_or(true),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Builtin(String),
    File(PathBuf),
    Counts { pool_size: u64, defaults: u64 },
}

/// Loaded data with the heading used in reports.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub title: String,
    pub series: DefaultTimeSeries,
}

impl DataSource {
    pub fn load(&self) -> anyhow::Result<LoadedData> {
        match self {
            DataSource::Builtin(name) => {
                let record = builtin_dataset(name)?;
                Ok(LoadedData { title: record.title.to_string(), series: record.series })
            }
            DataSource::File(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let series = parse_csv(&text).with_context(|| format!("parsing {}", path.display()))?;
                let title = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
                Ok(LoadedData { title, series })
            }
            DataSource::Counts { pool_size, defaults } => Ok(LoadedData {
                title: format!(
                    "Portfolio of {pool_size} obligors with {defaults} default{}",
                    if *defaults == 1 { "" } else { "s" }
                ),
                series: DefaultTimeSeries::single(*pool_size, *defaults)?,
            }),
        }
    }
}

/// Fully validated settings for one `estimate` invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub source: DataSource,
    pub pool: bool,
    /// One-period-correlated: ϱ with ϑ = 0. Multi-period: the pre-defined pair.
    pub correlation: Option<CorrelationParams>,
    pub levels: Vec<ConfidenceLevel>,
    pub constraints: Vec<PriorConstraint>,
    pub simulation: SimulationConfig,
    pub format: OutputFormat,
    pub execution: Execution,
    pub timestamp: bool,
}
