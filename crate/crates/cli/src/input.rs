//! Model files (TOML) and series files (CSV).

use std::fs;
use std::path::Path;

use parma_core::model::{validate, ModelSpec, PeriodicModel, ValidationError};
use serde::Deserialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: i64 = 1;

/// Reads a model file without validating the coefficients.
///
/// The file is a flat TOML table: `schema_version`, `l`, `p`, `q`,
/// `drift`, `sigma2`, and `ar` / `ma` as arrays of rows, one row per lag and
/// one entry per season.
pub fn read_spec(path: &Path) -> Result<ModelSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::parse(path, e.to_string()))?;
    match table.remove("schema_version") {
        None => return Err(CliError::parse(path, "missing field `schema_version`")),
        Some(toml::Value::Integer(SCHEMA_VERSION)) => {}
        Some(other) => {
            return Err(CliError::parse(
                path,
                format!("unsupported schema_version {other} (expected {SCHEMA_VERSION})"),
            ))
        }
    }
    toml::Value::Table(table)
        .try_into::<ModelSpec>()
        .map_err(|e| CliError::parse(path, e.to_string()))
}

pub fn invalid_model(path: &Path, err: &ValidationError) -> CliError {
    let lines: Vec<String> = err.violations.iter().map(|v| format!("  {v}")).collect();
    CliError::Invalid(format!(
        "{}: invalid model\n{}",
        path.display(),
        lines.join("\n")
    ))
}

pub fn read_model(path: &Path) -> Result<PeriodicModel, CliError> {
    let spec = read_spec(path)?;
    validate(spec).map_err(|e| invalid_model(path, &e))
}

/// Observed series, consecutive in time.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub times: Vec<i64>,
    pub values: Vec<f64>,
    /// Present when the file has an `epsilon` column.
    pub eps: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct Row {
    time: i64,
    season: usize,
    value: f64,
    epsilon: Option<f64>,
}

/// Reads `time,season,value[,epsilon]` and checks seasons against the clock.
pub fn read_series(path: &Path, model: &PeriodicModel) -> Result<Series, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::parse(path, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::parse(path, e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    let has_eps = match names.as_slice() {
        ["time", "season", "value"] => false,
        ["time", "season", "value", "epsilon"] => true,
        _ => {
            return Err(CliError::parse(
                path,
                format!(
                    "header must be `time,season,value` or `time,season,value,epsilon`, found `{}`",
                    names.join(",")
                ),
            ))
        }
    };
    let clock = model.clock();
    let mut series = Series {
        times: Vec::new(),
        values: Vec::new(),
        eps: has_eps.then(Vec::new),
    };
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| CliError::parse(path, format!("line {line}: {e}")))?;
        let expected = clock.season(row.time);
        if row.season != expected {
            return Err(CliError::Invalid(format!(
                "{}: line {line}: season {} does not match time {} (season {expected} of {})",
                path.display(),
                row.season,
                row.time,
                clock.period()
            )));
        }
        if let Some(&last) = series.times.last() {
            if row.time != last + 1 {
                return Err(CliError::Invalid(format!(
                    "{}: line {line}: time {} does not follow {last}",
                    path.display(),
                    row.time
                )));
            }
        }
        if !row.value.is_finite() {
            return Err(CliError::Invalid(format!(
                "{}: line {line}: value is not finite",
                path.display()
            )));
        }
        series.times.push(row.time);
        series.values.push(row.value);
        if let Some(eps) = series.eps.as_mut() {
            match row.epsilon {
                Some(e) if e.is_finite() => eps.push(e),
                _ => {
                    return Err(CliError::Invalid(format!(
                        "{}: line {line}: epsilon missing or not finite",
                        path.display()
                    )))
                }
            }
        }
    }
    if series.times.is_empty() {
        return Err(CliError::Invalid(format!(
            "{}: series is empty",
            path.display()
        )));
    }
    Ok(series)
}
