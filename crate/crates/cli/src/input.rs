use std::path::Path;

use affinv_core::linalg::{text::parse_matrix, Matrix};
use affinv_core::mcd::Dataset;

use crate::error::CliError;

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::NoInput {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    parse_matrix(&read_to_string(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Parses one point per row. A first row that is not entirely numeric is
/// taken as a header; every later row must have the same column count.
pub fn parse_dataset(text: &str) -> Result<Dataset, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(format!("CSV: {e}")))?;
        let line = record.position().map_or(row as u64 + 1, |p| p.line());
        let parsed: Vec<Result<f64, _>> = record.iter().map(str::parse::<f64>).collect();
        if row == 0 && parsed.iter().any(Result::is_err) {
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(CliError::Input(format!(
                "line {line}: expected {expected} columns, found {}",
                record.len()
            )));
        }
        let mut point = Vec::with_capacity(expected);
        for (col, (value, raw)) in parsed.into_iter().zip(record.iter()).enumerate() {
            match value {
                Ok(v) if v.is_finite() => point.push(v),
                _ => {
                    return Err(CliError::Input(format!(
                        "line {line}, column {}: {raw:?} is not a finite number",
                        col + 1
                    )))
                }
            }
        }
        points.push(point);
    }
    if points.is_empty() {
        return Err(CliError::Input("CSV contains no data rows".into()));
    }
    Dataset::new(points).map_err(|e| CliError::Input(e.to_string()))
}
