//! Default histories: validation, CSV interchange and the bundled datasets.
//!
//! The CSV format has exactly three columns, `year,pool_size,defaults`, one
//! row per consecutive year.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const HEADER: [&str; 3] = ["year", "pool_size", "defaults"];

/// One year of observations: pool size at the start, defaults by year end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearRecord {
    pub year: i32,
    pub pool_size: u64,
    pub defaults: u64,
}

/// Consecutive years of pool sizes and default counts with 0 ≤ k_t < n_t.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<YearRecord>", into = "Vec<YearRecord>")]
pub struct DefaultTimeSeries {
    rows: Vec<YearRecord>,
}

impl DefaultTimeSeries {
    pub fn new(rows: Vec<YearRecord>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Validation("a default history needs at least one year".into()));
        }
        for r in &rows {
            if r.pool_size == 0 {
                return Err(Error::Validation(format!("{}: pool size must be positive", r.year)));
            }
            if r.defaults >= r.pool_size {
                return Err(Error::Validation(format!(
                    "{}: defaults ({}) must be smaller than the pool size ({})",
                    r.year, r.defaults, r.pool_size
                )));
            }
        }
        for w in rows.windows(2) {
            if w[1].year == w[0].year {
                return Err(Error::Validation(format!("duplicate year {}", w[1].year)));
            }
            if w[1].year != w[0].year + 1 {
                return Err(Error::Validation(format!(
                    "years must increase by one, found {} after {}",
                    w[1].year, w[0].year
                )));
            }
        }
        Ok(DefaultTimeSeries { rows })
    }

    /// A single period, labelled year 1.
    pub fn single(pool_size: u64, defaults: u64) -> Result<Self> {
        DefaultTimeSeries::new(vec![YearRecord {
            year: 1,
            pool_size,
            defaults,
        }])
    }

    pub fn rows(&self) -> &[YearRecord] {
        &self.rows
    }

    /// Number of periods T.
    pub fn periods(&self) -> usize {
        self.rows.len()
    }

    pub fn obligor_years(&self) -> u64 {
        self.rows.iter().map(|r| r.pool_size).sum()
    }

    pub fn total_defaults(&self) -> u64 {
        self.rows.iter().map(|r| r.defaults).sum()
    }

    /// Pooled default frequency Σk / Σn.
    pub fn naive_estimate(&self) -> f64 {
        self.total_defaults() as f64 / self.obligor_years() as f64
    }
}

impl TryFrom<Vec<YearRecord>> for DefaultTimeSeries {
    type Error = Error;
    fn try_from(rows: Vec<YearRecord>) -> Result<Self> {
        DefaultTimeSeries::new(rows)
    }
}

impl From<DefaultTimeSeries> for Vec<YearRecord> {
    fn from(s: DefaultTimeSeries) -> Self {
        s.rows
    }
}

/// Parses `year,pool_size,defaults` CSV text. Errors carry 1-based line numbers.
pub fn parse_csv(content: &str) -> Result<DefaultTimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes());

    let header = reader.headers().map_err(|e| csv_error(&e, 1))?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names != HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`, found `{}`", HEADER.join(","), names.join(",")),
        });
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e, 0))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != HEADER.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", HEADER.len(), record.len()),
            });
        }
        let field = |i: usize| &record[i];
        let parse_err = |name: &str, value: &str| Error::Parse {
            line,
            message: format!("{name} must be a nonnegative integer, found `{value}`"),
        };
        let year: i32 = field(0).parse().map_err(|_| Error::Parse {
            line,
            message: format!("year must be an integer, found `{}`", field(0)),
        })?;
        let pool_size: u64 = field(1).parse().map_err(|_| parse_err("pool_size", field(1)))?;
        let defaults: u64 = field(2).parse().map_err(|_| parse_err("defaults", field(2)))?;
        rows.push((line, YearRecord { year, pool_size, defaults }));
    }

    // Attach the offending line to row-level validation failures.
    for (i, (line, r)) in rows.iter().enumerate() {
        let single = DefaultTimeSeries::new(vec![*r]);
        if let Err(Error::Validation(message)) = single {
            return Err(Error::Parse { line: *line, message });
        }
        if i > 0 {
            let prev = rows[i - 1].1;
            if let Err(Error::Validation(message)) = DefaultTimeSeries::new(vec![prev, *r]) {
                return Err(Error::Parse { line: *line, message });
            }
        }
    }
    DefaultTimeSeries::new(rows.into_iter().map(|(_, r)| r).collect())
}

fn csv_error(e: &csv::Error, fallback_line: usize) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line() as usize);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

pub fn serialize_csv(series: &DefaultTimeSeries) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(HEADER).expect("writing to memory");
    for r in series.rows() {
        writer
            .write_record([r.year.to_string(), r.pool_size.to_string(), r.defaults.to_string()])
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("ASCII output")
}

/// A bundled default history with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetRecord {
    pub name: &'static str,
    /// Heading used in reports.
    pub title: &'static str,
    pub description: &'static str,
    pub series: DefaultTimeSeries,
    pub source: &'static str,
}

struct Builtin {
    name: &'static str,
    title: &'static str,
    description: &'static str,
    source: &'static str,
    csv: &'static str,
}

const BUILTINS: [Builtin; 2] = [
    Builtin {
        name: "fictitious",
        title: "Fictitious Default Data",
        description: "Eight years of 125 borrowers with a single default in the final year",
        source: "Illustrative data",
        csv: include_str!("../data/fictitious.csv"),
    },
    Builtin {
        name: "moodys_investment_grade",
        title: "Moody's Investment Grade",
        description: "Moody's investment grade issuers (Aaa to Baa) and their defaults, 1990-2010",
        source: "Moody's Investors Service (2011), Corporate Default and Recovery Rates, Exhibits 17 and 42",
        csv: include_str!("../data/moodys_investment_grade.csv"),
    },
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|b| b.name)
}

pub fn builtin_dataset(name: &str) -> Result<DatasetRecord> {
    let b = BUILTINS
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| Error::UnknownDataset(name.to_string()))?;
    Ok(DatasetRecord {
        name: b.name,
        title: b.title,
        description: b.description,
        series: parse_csv(b.csv).expect("bundled datasets are valid"),
        source: b.source,
    })
}
