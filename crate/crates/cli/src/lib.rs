//! Command-line front end for the `lowpd` estimators.

pub mod commands;
pub mod report;
pub mod settings;

use std::io::Write;

use clap::{Args, Parser, Subcommand};

use settings::{OutputFormat, Settings};

#[derive(Debug, Parser)]
#[command(name = "lowpd", version, about = "PD estimation for low default portfolios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the PD of a portfolio.
    Estimate(Box<Settings>),
    /// Tabulate binomial and correlated binomial probabilities.
    CompareDist(CompareArgs),
    /// List the bundled datasets.
    Datasets(FormatArg),
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Pool size.
    #[arg(long)]
    pub n: u64,
    /// Unconditional PD.
    #[arg(long)]
    pub lambda: f64,
    /// Asset correlation.
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[command(flatten)]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct FormatArg {
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

fn emit<T: serde::Serialize + std::fmt::Display>(out: &mut impl Write, value: &T, format: OutputFormat) -> anyhow::Result<()> {
    match format {
        OutputFormat::Text => write!(out, "{value}")?,
        OutputFormat::Structured => writeln!(out, "{}", serde_json::to_string_pretty(value)?)?,
    }
    Ok(())
}

struct Lines<T>(Vec<T>);

impl<T: std::fmt::Display> std::fmt::Display for Lines<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.iter().try_for_each(|x| writeln!(f, "{x}"))
    }
}

impl<T: serde::Serialize> serde::Serialize for Lines<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// Runs one command, writing the result to `out`. Estimator failures are
/// reported after the output and turn into an error.
pub fn run(cli: Cli, out: &mut impl Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Estimate(settings) => {
            let config = settings.load()?.resolve()?;
            let report = commands::cmd_estimate(&config)?;
            emit(out, &report, config.format)?;
            let failures = report.failures();
            if !failures.is_empty() {
                anyhow::bail!("{} estimator(s) failed:\n  {}", failures.len(), failures.join("\n  "));
            }
        }
        Command::CompareDist(a) => {
            let table = commands::cmd_compare_distributions(a.n, a.lambda, a.rho)?;
            emit(out, &table, a.format.format)?;
        }
        Command::Datasets(f) => emit(out, &Lines(commands::cmd_datasets()), f.format)?,
    }
    Ok(())
}
