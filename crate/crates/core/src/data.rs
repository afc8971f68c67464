//! Loading and validating observed case-count series and region metadata.
//!
//! The on-disk format is a four-column CSV, `date,cumulative_cases,
//! recovered,deaths`, with ISO dates on consecutive days and all three
//! count columns non-decreasing. Active infections are derived, never
//! stored: `active = cumulative - recovered - deaths`.

use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::compartments::InitialSplit;
use crate::error::{Error, Result};

/// One observed day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyRecord {
    pub date: NaiveDate,
    pub cumulative_cases: f64,
    pub recovered: f64,
    pub deaths: f64,
}

impl DailyRecord {
    /// Currently infected on this day.
    pub fn active_infected(&self) -> f64 {
        self.cumulative_cases - self.recovered - self.deaths
    }
}

/// A validated daily case series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSeries {
    pub records: Vec<DailyRecord>,
}

/// The observed channels the loss and metrics compare against, one value
/// per day.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedSeries {
    pub active_infected: Vec<f64>,
    pub recovered: Vec<f64>,
    pub deaths: Vec<f64>,
}

impl ObservedSeries {
    pub fn len(&self) -> usize {
        self.active_infected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active_infected.is_empty()
    }
}

impl CaseSeries {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The (I₀, R₀, D₀) triple from the first day.
    pub fn first_observation(&self) -> Result<(f64, f64, f64)> {
        let first = self
            .records
            .first()
            .ok_or_else(|| Error::InvalidConfig("case series is empty".into()))?;
        Ok((first.active_infected(), first.recovered, first.deaths))
    }

    /// The per-day channels compared against model output.
    pub fn observed(&self) -> ObservedSeries {
        ObservedSeries {
            active_infected: self.records.iter().map(|r| r.active_infected()).collect(),
            recovered: self.records.iter().map(|r| r.recovered).collect(),
            deaths: self.records.iter().map(|r| r.deaths).collect(),
        }
    }

    /// Splits off the final `holdout_days` as a test window. The training
    /// part must keep at least two days so a trajectory can be fitted.
    pub fn split_train_test(&self, holdout_days: usize) -> Result<(CaseSeries, CaseSeries)> {
        if self.len() < holdout_days + 2 {
            return Err(Error::SeriesTooShort {
                len: self.len(),
                holdout: holdout_days,
            });
        }
        let cut = self.len() - holdout_days;
        Ok((
            CaseSeries {
                records: self.records[..cut].to_vec(),
            },
            CaseSeries {
                records: self.records[cut..].to_vec(),
            },
        ))
    }
}

const EXPECTED_HEADER: [&str; 4] = ["date", "cumulative_cases", "recovered", "deaths"];

fn parse_count(
    field: &str,
    column: &'static str,
    path: &str,
    row: usize,
) -> Result<f64> {
    let value: f64 = field.parse().map_err(|_| Error::BadRow {
        path: path.to_string(),
        row,
        message: format!("`{column}` is not a number: {field:?}"),
    })?;
    if !value.is_finite() || value < 0.0 {
        return Err(Error::BadRow {
            path: path.to_string(),
            row,
            message: format!("`{column}` must be finite and non-negative, got {value}"),
        });
    }
    Ok(value)
}

/// Reads and fully validates a case-series CSV.
pub fn load_case_series(path: impl AsRef<Path>) -> Result<CaseSeries> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let io_err = |source| Error::Io {
        path: path_str.clone(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers = reader.headers().map_err(|source| Error::Csv {
        path: path_str.clone(),
        source,
    })?;
    if headers.len() != 4 || headers.iter().zip(EXPECTED_HEADER).any(|(h, e)| h != e) {
        return Err(Error::BadHeader { path: path_str });
    }

    let mut records: Vec<DailyRecord> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|source| Error::Csv {
            path: path_str.clone(),
            source,
        })?;
        if record.len() != 4 {
            return Err(Error::BadRow {
                path: path_str,
                row,
                message: format!("expected 4 fields, got {}", record.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|_| {
            Error::BadRow {
                path: path_str.clone(),
                row,
                message: format!("`date` is not an ISO date: {:?}", &record[0]),
            }
        })?;
        let cumulative_cases = parse_count(&record[1], "cumulative_cases", &path_str, row)?;
        let recovered = parse_count(&record[2], "recovered", &path_str, row)?;
        let deaths = parse_count(&record[3], "deaths", &path_str, row)?;

        if let Some(prev) = records.last() {
            let expected = prev.date.succ_opt().expect("date overflow");
            if date != expected {
                return Err(Error::DateGap {
                    path: path_str,
                    row,
                    before: prev.date,
                    after: date,
                    expected,
                });
            }
            for (column, previous, value) in [
                ("cumulative_cases", prev.cumulative_cases, cumulative_cases),
                ("recovered", prev.recovered, recovered),
                ("deaths", prev.deaths, deaths),
            ] {
                if value < previous {
                    return Err(Error::NonMonotonic {
                        path: path_str,
                        row,
                        column,
                        previous,
                        value,
                    });
                }
            }
        }
        if recovered + deaths > cumulative_cases {
            return Err(Error::InconsistentCounts {
                path: path_str,
                row,
                sum: recovered + deaths,
                cumulative: cumulative_cases,
            });
        }
        records.push(DailyRecord {
            date,
            cumulative_cases,
            recovered,
            deaths,
        });
    }
    if records.is_empty() {
        return Err(Error::BadRow {
            path: path_str,
            row: 0,
            message: "no data rows".into(),
        });
    }
    Ok(CaseSeries { records })
}

/// Writes a series back out in the canonical four-column format.
pub fn write_case_series(path: impl AsRef<Path>, series: &CaseSeries) -> Result<()> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let mut writer = csv::Writer::from_path(path).map_err(|source| Error::Csv {
        path: path_str.clone(),
        source,
    })?;
    writer
        .write_record(EXPECTED_HEADER)
        .and_then(|_| {
            for r in &series.records {
                writer.write_record([
                    r.date.format("%Y-%m-%d").to_string(),
                    r.cumulative_cases.to_string(),
                    r.recovered.to_string(),
                    r.deaths.to_string(),
                ])?;
            }
            writer.flush()?;
            Ok(())
        })
        .map_err(|source| Error::Csv {
            path: path_str,
            source: source.into(),
        })
}

fn default_e0_ratio() -> f64 {
    1.0
}

fn default_mild_fraction() -> f64 {
    0.9
}

/// Region metadata: the population the model conserves and how the first
/// observation is split across latent compartments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    pub region_id: String,
    pub population: f64,
    /// E₀ as a multiple of I₀ for variants with an exposed compartment.
    #[serde(default = "default_e0_ratio")]
    pub e0_ratio: f64,
    /// Share of initial infections that are mild for SMCRD/SEMCRD.
    #[serde(default = "default_mild_fraction")]
    pub mild_fraction: f64,
}

impl RegionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.population > 0.0) || !self.population.is_finite() {
            return Err(Error::NonPositivePopulation(self.population));
        }
        if !(0.0..=1.0).contains(&self.mild_fraction) {
            return Err(Error::InvalidConfig(format!(
                "mild_fraction must lie in [0, 1], got {}",
                self.mild_fraction
            )));
        }
        if self.e0_ratio < 0.0 || !self.e0_ratio.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "e0_ratio must be non-negative, got {}",
                self.e0_ratio
            )));
        }
        Ok(())
    }

    pub fn initial_split(&self) -> InitialSplit {
        InitialSplit {
            e0_ratio: self.e0_ratio,
            mild_fraction: self.mild_fraction,
        }
    }
}

/// Loads and validates a region-config JSON file.
pub fn load_region_config(path: impl AsRef<Path>) -> Result<RegionConfig> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path_str.clone(),
        source,
    })?;
    let config: RegionConfig = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("{path_str}: {e}")))?;
    config.validate()?;
    Ok(config)
}
