//! Plain-text matrix format.
//!
//! ```text
//! 2
//! 1.0000000000000000e0 0.0000000000000000e0
//! 0.0000000000000000e0 1.0000000000000000e0
//! ```
//!
//! The first line holds `n`; each of the next `n` lines holds one row of `n`
//! whitespace-separated decimals. The writer emits 17 significant digits so
//! that parsing the output reproduces every entry bit for bit.

use std::fmt::Write;

use super::{check_dim, LinalgError, Matrix};

/// Formats a float with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_matrix(m: &Matrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_f64(m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<Matrix, LinalgError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line_no, header) = lines.next().ok_or(LinalgError::Parse {
        line: 1,
        msg: "empty input".into(),
    })?;
    let n: usize = header.parse().map_err(|_| LinalgError::Parse {
        line: line_no,
        msg: format!("expected dimension, found {header:?}"),
    })?;
    check_dim(n).map_err(|e| LinalgError::Parse {
        line: line_no,
        msg: e.to_string(),
    })?;

    let mut data = Vec::with_capacity(n * n);
    for row in 0..n {
        let (line_no, line) = lines.next().ok_or(LinalgError::Parse {
            line: line_no + row + 1,
            msg: format!("expected {n} rows, found {row}"),
        })?;
        let values = line
            .split_whitespace()
            .enumerate()
            .map(|(col, tok)| {
                tok.parse::<f64>().map_err(|_| LinalgError::Parse {
                    line: line_no,
                    msg: format!("column {}: invalid number {tok:?}", col + 1),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != n {
            return Err(LinalgError::Parse {
                line: line_no,
                msg: format!("expected {n} entries, found {}", values.len()),
            });
        }
        data.extend(values);
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(LinalgError::Parse {
            line: line_no,
            msg: "trailing content after matrix".into(),
        });
    }
    Ok(Matrix::from_row_slice(n, n, &data))
}
