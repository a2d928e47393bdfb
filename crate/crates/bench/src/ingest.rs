//! Numeric CSV input.

use std::path::Path;

use crate::error::{BenchError, Result};

/// Parses a selection such as `0-9,12` into zero-based column indices,
/// in the order given.
pub fn parse_columns(spec: &str) -> Result<Vec<usize>> {
    let bad = || BenchError::Columns(spec.to_string());
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim) {
        if part.is_empty() {
            return Err(bad());
        }
        match part.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

/// Reads at most `max_rows` points from `path`, keeping the selected
/// columns. The first row is treated as a header when any selected field in
/// it is not a number; any later non-numeric field is an error carrying its
/// one-based row and zero-based column.
pub fn load_points_csv(path: &Path, columns: &[usize], max_rows: usize) -> Result<Vec<Vec<f64>>> {
    if columns.is_empty() {
        return Err(BenchError::Columns(String::new()));
    }
    let file = std::fs::File::open(path).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(std::io::BufReader::new(file));
    let mut points = Vec::new();
    let mut first = true;
    for record in reader.records() {
        if points.len() >= max_rows {
            break;
        }
        let record = record.map_err(|source| BenchError::Csv { path: path.to_path_buf(), source })?;
        let row = || record.position().map_or(0, |p| physical_line(path, p.byte()));
        let is_first = std::mem::replace(&mut first, false);
        let mut point = Vec::with_capacity(columns.len());
        let mut failure = None;
        for &c in columns {
            let Some(field) = record.get(c) else {
                return Err(BenchError::MissingColumn { path: path.to_path_buf(), row: row(), column: c, found: record.len() });
            };
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => point.push(v),
                _ => {
                    failure = Some((c, field.to_string()));
                    break;
                }
            }
        }
        match failure {
            None => points.push(point),
            Some(_) if is_first => {}
            Some((column, value)) => {
                return Err(BenchError::Parse { path: path.to_path_buf(), row: row(), column, value });
            }
        }
    }
    Ok(points)
}

/// One-based line holding byte `offset`; the csv reader's own count skips
/// blank lines.
fn physical_line(path: &Path, offset: u64) -> u64 {
    let bytes = std::fs::read(path).unwrap_or_default();
    let mut end = (offset as usize).min(bytes.len());
    while end < bytes.len() && matches!(bytes[end], b'\n' | b'\r') {
        end += 1;
    }
    1 + bytes[..end].iter().filter(|&&b| b == b'\n').count() as u64
}
