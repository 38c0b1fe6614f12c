//! CSV formats. Floats are written with 10 significant digits so files are
//! byte-stable across runs and platforms.

use std::path::Path;

use crate::error::{CliError, Result};

pub const SWEEP_HEADER: [&str; 4] = ["hammer_h", "mean_fullness", "min_fullness", "max_fullness"];
pub const ANALYZE_HEADER: [&str; 4] = ["r", "predicted_fullness", "table_bound", "deferred_closed_form"];

/// `x` rounded to `digits` significant digits, in positional notation.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    // exponent after rounding, so 0.99999999999 counts as 1.0
    let sci = format!("{x:.prec$e}", prec = digits.saturating_sub(1));
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub batch: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(SWEEP_HEADER).map_err(fail)?;
    for row in rows {
        w.write_record([
            row.batch.to_string(),
            format_sig(row.mean, 10),
            format_sig(row.min, 10),
            format_sig(row.max, 10),
        ])
        .map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Parses a sweep CSV; errors name the offending line.
pub fn read_sweep(path: &Path) -> Result<Vec<SweepRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_sweep(&text).map_err(|msg| CliError::Param(format!("{}: {msg}", path.display())))
}

pub fn parse_sweep(text: &str) -> std::result::Result<Vec<SweepRow>, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| format!("line 1: {e}"))?.clone();
    if headers.is_empty() {
        return Err("empty file".into());
    }
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("line 1: missing column `{name}`"))
    };
    let idx = [
        col(SWEEP_HEADER[0])?,
        col(SWEEP_HEADER[1])?,
        col(SWEEP_HEADER[2])?,
        col(SWEEP_HEADER[3])?,
    ];
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            format!("line {line}: {e}")
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| {
            rec.get(idx[i])
                .ok_or_else(|| format!("line {line}: missing field `{}`", SWEEP_HEADER[i]))
        };
        let batch = field(0)?
            .parse::<usize>()
            .map_err(|e| format!("line {line}: bad `hammer_h`: {e}"))?;
        let mut vals = [0.0; 3];
        for (k, v) in vals.iter_mut().enumerate() {
            *v = field(k + 1)?
                .parse::<f64>()
                .map_err(|e| format!("line {line}: bad `{}`: {e}", SWEEP_HEADER[k + 1]))?;
            if !v.is_finite() {
                return Err(format!("line {line}: non-finite `{}`", SWEEP_HEADER[k + 1]));
            }
        }
        rows.push(SweepRow {
            batch,
            mean: vals[0],
            min: vals[1],
            max: vals[2],
        });
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeRow {
    pub batch: usize,
    pub predicted: Option<f64>,
    pub table_bound: Option<f64>,
    pub deferred: Option<f64>,
}

pub fn analyze_csv(rows: &[AnalyzeRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(ANALYZE_HEADER).map_err(fail)?;
    let cell = |v: Option<f64>| v.map(|x| format_sig(x, 10)).unwrap_or_default();
    for row in rows {
        w.write_record([
            row.batch.to_string(),
            cell(row.predicted),
            cell(row.table_bound),
            cell(row.deferred),
        ])
        .map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}
