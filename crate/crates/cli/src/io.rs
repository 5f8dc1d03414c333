//! CSV ingestion and report serialization.

use std::io::Write;
use std::path::Path;

use lptime_core::SeriesSample;
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const MIN_ROWS: usize = 10;
pub const JSON_DIGITS: usize = 10;
pub const CSV_DIGITS: usize = 8;

const TIME_COLUMNS: [&str; 4] = ["date", "time", "timestamp", "datetime"];

/// A numeric column read from a CSV file, with the matching time stamps when
/// the file has a date/time column.
#[derive(Debug, Clone, PartialEq)]
pub struct RawColumn {
    pub name: String,
    pub values: Vec<f64>,
    pub timestamps: Option<Vec<String>>,
}

/// Reads `column` (the last column when `None`). Row numbers in errors count
/// data rows from 1, not including the header.
pub fn read_column(path: &Path, column: Option<&str>) -> CliResult<RawColumn> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    if headers.is_empty() {
        return Err(CliError::Data(format!("{} has no header row", path.display())));
    }
    let idx = match column {
        Some(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("column '{name}' not found in {}", path.display())))?,
        None => headers.len() - 1,
    };
    let time_idx = headers
        .iter()
        .position(|h| TIME_COLUMNS.contains(&h.to_ascii_lowercase().as_str()))
        .filter(|&t| t != idx);

    let mut values = Vec::new();
    let mut stamps = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let cell = record.get(idx).unwrap_or("");
        let v: f64 = cell.parse().map_err(|_| CliError::Parse {
            row: row + 1,
            message: format!("non-numeric value '{cell}' in column '{}'", &headers[idx]),
        })?;
        if !v.is_finite() {
            return Err(CliError::Parse {
                row: row + 1,
                message: format!("non-finite value '{cell}' in column '{}'", &headers[idx]),
            });
        }
        values.push(v);
        if let Some(t) = time_idx {
            stamps.push(record.get(t).unwrap_or("").to_string());
        }
    }
    Ok(RawColumn {
        name: headers[idx].to_string(),
        values,
        timestamps: time_idx.map(|_| stamps),
    })
}

/// `log(P_t / P_{t−1})`; prices must be positive.
pub fn returns_from_prices(prices: &[f64]) -> CliResult<Vec<f64>> {
    if let Some(i) = prices.iter().position(|p| !(*p > 0.0)) {
        return Err(CliError::Data(format!("price at row {} is not positive", i + 1)));
    }
    Ok(prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

/// Reads the series, optionally converting to log returns, and requires at
/// least ten usable rows.
pub fn load_series(path: &Path, column: Option<&str>, as_returns: bool) -> CliResult<SeriesSample> {
    let raw = read_column(path, column)?;
    let (values, stamps) = if as_returns {
        let r = returns_from_prices(&raw.values)?;
        (r, raw.timestamps.map(|t| t[1..].to_vec()))
    } else {
        (raw.values, raw.timestamps)
    };
    if values.len() < MIN_ROWS {
        return Err(CliError::Data(format!(
            "{} usable rows in column '{}', need at least {MIN_ROWS}",
            values.len(),
            raw.name
        )));
    }
    let sample = SeriesSample::new(values)?;
    Ok(match stamps {
        Some(t) => sample.with_timestamps(t)?,
        None => sample,
    })
}

/// `x` rounded to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// Rounds every floating-point number in a JSON tree.
pub fn round_json(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig(x, digits))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|i| round_json(i, digits)),
        Value::Object(map) => map.values_mut().for_each(|i| round_json(i, digits)),
        _ => {}
    }
}

pub fn json_string(v: &Value) -> String {
    let mut v = v.clone();
    round_json(&mut v, JSON_DIGITS);
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) if x.is_finite() => format!("{}", round_sig(*x, CSV_DIGITS)),
                    Cell::Num(x) => format!("{x}"),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(t) => t.clone(),
                })
                .collect();
            w.write_record(&fields)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("CSV fields are UTF-8"))
    }
}

pub fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
