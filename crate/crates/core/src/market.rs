//! Exchange-rate matrices: loading, validation, normalization and log weights.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("matrix is not square: {0}")]
    NonSquare(String),
    #[error("rate at ({row}, {col}) must be a positive finite number, got {value}")]
    NonPositiveRate { row: usize, col: usize, value: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("normalization coefficient {index} must be positive, got {value}")]
    NonPositiveCoefficient { index: usize, value: f64 },
    #[error("at least two currencies are required, got {0}")]
    TooFewCurrencies(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Pairwise exchange rates. `rates[i][j]` is the amount of currency `j`
/// received for one unit of currency `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitMatrix {
    labels: Vec<String>,
    rates: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawMatrix {
    labels: Vec<String>,
    rates: Vec<Vec<Option<f64>>>,
}

impl TransitMatrix {
    /// Validates and builds a matrix. Diagonal entries are overwritten with 1.
    pub fn new(labels: Vec<String>, rates: Vec<Vec<f64>>) -> Result<Self, MarketError> {
        let rows = rates
            .into_iter()
            .map(|r| r.into_iter().map(Some).collect())
            .collect();
        Self::from_optional(labels, rows)
    }

    fn from_optional(
        labels: Vec<String>,
        rates: Vec<Vec<Option<f64>>>,
    ) -> Result<Self, MarketError> {
        let n = labels.len();
        if rates.len() != n {
            return Err(MarketError::NonSquare(format!(
                "{n} labels but {} rows",
                rates.len()
            )));
        }
        if n < 2 {
            return Err(MarketError::TooFewCurrencies(n));
        }
        let mut out = Vec::with_capacity(n);
        for (i, row) in rates.into_iter().enumerate() {
            if row.len() != n {
                return Err(MarketError::NonSquare(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            let mut checked = Vec::with_capacity(n);
            for (j, value) in row.into_iter().enumerate() {
                if i == j {
                    checked.push(1.0);
                    continue;
                }
                match value {
                    Some(v) if v.is_finite() && v > 0.0 => checked.push(v),
                    Some(v) => {
                        return Err(MarketError::NonPositiveRate {
                            row: i,
                            col: j,
                            value: v,
                        })
                    }
                    None => {
                        return Err(MarketError::Parse(format!(
                            "missing off-diagonal rate at ({i}, {j})"
                        )))
                    }
                }
            }
            out.push(checked);
        }
        Ok(Self { labels, rates: out })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rates(&self) -> &[Vec<f64>] {
        &self.rates
    }

    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.rates[from][to]
    }

    /// Parses CSV (header row of labels, then `n` rows of `n` rates). An empty
    /// diagonal field is accepted and read as 1.
    pub fn from_csv_str(text: &str) -> Result<Self, MarketError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let labels: Vec<String> = reader
            .headers()
            .map_err(|e| MarketError::Parse(e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| MarketError::Parse(e.to_string()))?;
            let row = record
                .iter()
                .enumerate()
                .map(|(j, field)| {
                    if field.is_empty() {
                        if i == j {
                            Ok(None)
                        } else {
                            Err(MarketError::Parse(format!("empty field at ({i}, {j})")))
                        }
                    } else {
                        field.parse::<f64>().map(Some).map_err(|e| {
                            MarketError::Parse(format!("field ({i}, {j}) {field:?}: {e}"))
                        })
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::from_optional(labels, rows)
    }

    /// Parses `{"labels": [...], "rates": [[...], ...]}`; `null` is allowed on
    /// the diagonal.
    pub fn from_json_str(text: &str) -> Result<Self, MarketError> {
        let raw: RawMatrix =
            serde_json::from_str(text).map_err(|e| MarketError::Parse(e.to_string()))?;
        Self::from_optional(raw.labels, raw.rates)
    }

    /// Accepts either format, picking JSON when the first non-blank character
    /// is `{`.
    pub fn parse(text: &str) -> Result<Self, MarketError> {
        if text.trim_start().starts_with('{') {
            Self::from_json_str(text)
        } else {
            Self::from_csv_str(text)
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MarketError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// CSV rendering using shortest round-trip float formatting, so
    /// `from_csv_str(to_csv())` reproduces every rate bit for bit.
    pub fn to_csv(&self) -> String {
        let mut out = self.labels.join(",");
        out.push('\n');
        for row in &self.rates {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes")
    }

    /// Rescales every rate by `v[j] / v[i]`. Cycle products are unchanged
    /// because the coefficients telescope.
    pub fn normalize(&self, v: &NormalizationVector) -> Result<Self, MarketError> {
        let n = self.len();
        if v.coeffs.len() != n {
            return Err(MarketError::DimensionMismatch {
                expected: n,
                actual: v.coeffs.len(),
            });
        }
        let rates = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            1.0
                        } else {
                            self.rates[i][j] * v.coeffs[j] / v.coeffs[i]
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(self.labels.clone(), rates)
    }

    /// Natural-log weights `W[i][j] = ln(rate[i][j])`, zero on the diagonal.
    pub fn log_weights(&self) -> Vec<Vec<f64>> {
        self.rates
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, &r)| if i == j { 0.0 } else { r.ln() })
                    .collect()
            })
            .collect()
    }

    /// Product of rates along the closed cycle `c[0] -> c[1] -> ... -> c[0]`.
    pub fn cycle_product(&self, cycle: &[usize]) -> f64 {
        cycle
            .iter()
            .zip(cycle.iter().cycle().skip(1))
            .map(|(&a, &b)| self.rates[a][b])
            .product()
    }
}

/// One positive scaling coefficient per currency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationVector {
    coeffs: Vec<f64>,
}

impl NormalizationVector {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, MarketError> {
        if let Some((index, &value)) = coeffs
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(MarketError::NonPositiveCoefficient { index, value });
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Reads either a CSV (label header plus one row of coefficients) or a
    /// JSON array of numbers.
    pub fn parse(text: &str) -> Result<Self, MarketError> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('[') {
            let coeffs: Vec<f64> =
                serde_json::from_str(trimmed).map_err(|e| MarketError::Parse(e.to_string()))?;
            return Self::new(coeffs);
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let record = reader
            .records()
            .next()
            .ok_or_else(|| MarketError::Parse("normalization file has no data row".into()))?
            .map_err(|e| MarketError::Parse(e.to_string()))?;
        let coeffs = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| MarketError::Parse(format!("{f:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(coeffs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MarketError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}
