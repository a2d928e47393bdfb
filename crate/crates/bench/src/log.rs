//! Per-step CSV log.

use std::io::Write;
use std::path::Path;

use crate::error::{BenchError, Result};

pub const LOG_HEADER: &str = "t,cost_p,p,outliers,recourse_step,recourse_total,swaps,stage,lazy_skipped,baseline_cost,ratio";

#[derive(Clone, Debug, PartialEq)]
pub struct StepLogRow {
    pub t: usize,
    pub cost_p: f64,
    pub p: f64,
    pub outliers: usize,
    pub recourse_step: usize,
    pub recourse_total: usize,
    pub swaps: usize,
    pub stage: usize,
    pub lazy_skipped: bool,
    pub baseline_cost: Option<f64>,
    /// Inlier cost over the interpolated baseline.
    pub ratio: Option<f64>,
}

/// 17 significant digits, enough to read back the exact double.
fn real(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn optional(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

pub fn write_log<W: Write>(rows: &[StepLogRow], mut out: W) -> std::io::Result<()> {
    out.write_all(LOG_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            real(r.cost_p),
            real(r.p),
            r.outliers,
            r.recourse_step,
            r.recourse_total,
            r.swaps,
            r.stage,
            u8::from(r.lazy_skipped),
            optional(r.baseline_cost),
            optional(r.ratio),
        )?;
    }
    out.flush()
}

/// Writes the log to `path`; an empty log is rejected.
pub fn emit_log_csv(rows: &[StepLogRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(BenchError::Spec("refusing to write an empty log".into()));
    }
    let io = |source| BenchError::Io { path: path.to_path_buf(), source };
    let file = std::fs::File::create(path).map_err(io)?;
    write_log(rows, std::io::BufWriter::new(file)).map_err(io)
}

pub fn read_log(path: &Path) -> Result<Vec<StepLogRow>> {
    let file = std::fs::File::open(path).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })?;
    let mut reader = csv::ReaderBuilder::new().from_reader(std::io::BufReader::new(file));
    let bad = |reason: String| BenchError::Log { path: path.to_path_buf(), reason };
    let header = reader.headers().map_err(|source| BenchError::Csv { path: path.to_path_buf(), source })?;
    if header.iter().collect::<Vec<_>>().join(",") != LOG_HEADER {
        return Err(bad("unexpected header".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|source| BenchError::Csv { path: path.to_path_buf(), source })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).ok_or_else(|| bad(format!("line {line}: missing field {i}")));
        let int = |i: usize| -> Result<usize> {
            field(i)?.parse().map_err(|_| bad(format!("line {line}: field {i} is not an integer")))
        };
        let num = |i: usize| -> Result<f64> {
            field(i)?.parse().map_err(|_| bad(format!("line {line}: field {i} is not a number")))
        };
        let opt = |i: usize| -> Result<Option<f64>> {
            if field(i)?.is_empty() { Ok(None) } else { num(i).map(Some) }
        };
        let lazy = match field(8)? {
            "0" => false,
            "1" => true,
            other => return Err(bad(format!("line {line}: lazy_skipped is {other:?}"))),
        };
        rows.push(StepLogRow {
            t: int(0)?,
            cost_p: num(1)?,
            p: num(2)?,
            outliers: int(3)?,
            recourse_step: int(4)?,
            recourse_total: int(5)?,
            swaps: int(6)?,
            stage: int(7)?,
            lazy_skipped: lazy,
            baseline_cost: opt(9)?,
            ratio: opt(10)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(cost: f64, p: f64, baseline: Option<f64>) -> StepLogRow {
        StepLogRow {
            t: 1,
            cost_p: cost,
            p,
            outliers: 2,
            recourse_step: 1,
            recourse_total: 1,
            swaps: 0,
            stage: 3,
            lazy_skipped: true,
            baseline_cost: baseline,
            ratio: baseline.map(|b| cost / b),
        }
    }

    #[test]
    fn exact_text() {
        let mut buf = Vec::new();
        write_log(&[row(0.1, f64::INFINITY, None)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, format!("{LOG_HEADER}\n1,1.0000000000000001e-1,inf,2,1,1,0,3,1,,\n"));
    }

    #[test]
    fn empty_log_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_log_csv(&[], &dir.path().join("x.csv")).is_err());
    }

    proptest! {
        #[test]
        fn values_survive_the_file(cost in 0.1f64..1e12, p in 1e-6f64..1e9, b in proptest::option::of(0.1f64..1e12)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("log.csv");
            let rows = vec![row(cost, p, b)];
            emit_log_csv(&rows, &path).unwrap();
            prop_assert_eq!(read_log(&path).unwrap(), rows);
        }
    }
}
