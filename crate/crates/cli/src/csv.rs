//! CSV traces: header row, `t` first, one column per series, LF endings.
//!
//! Values are written in fixed-point with 12 decimals so that any value in
//! `[-1, 1]` and any time below `10^3` keeps at least 12 significant digits
//! and parses back within `1e-12`.

use std::fs;
use std::path::Path;

use qpar::experiments::TimeGrid;

use crate::error::{CliError, CliResult};

/// A named column sampled on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            values,
        }
    }
}

/// Parsed CSV: the time column and the remaining columns in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub times: Vec<f64>,
    pub columns: Vec<Column>,
}

fn fmt_value(v: f64) -> String {
    let s = format!("{v:.12}");
    // Values that round to zero print without a sign.
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

/// Renders the CSV document. Every column must have one value per grid point.
pub fn format_csv(grid: &TimeGrid, columns: &[Column]) -> CliResult<String> {
    let n = grid.n_samples();
    if columns.is_empty() {
        return Err(CliError::config("output.csv", "nothing to write"));
    }
    if columns.iter().any(|c| c.values.len() != n) {
        return Err(CliError::Core(qpar::Error::GridMismatch));
    }
    let mut out = String::with_capacity(n * (columns.len() + 1) * 18);
    out.push('t');
    for c in columns {
        out.push(',');
        out.push_str(&c.name);
    }
    out.push('\n');
    for k in 0..n {
        out.push_str(&fmt_value(grid.time(k)));
        for c in columns {
            out.push(',');
            out.push_str(&fmt_value(c.values[k]));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_csv(path: &Path, grid: &TimeGrid, columns: &[Column]) -> CliResult<()> {
    let text = format_csv(grid, columns)?;
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn parse_csv(text: &str) -> CliResult<Table> {
    let bad = |line: usize, msg: String| CliError::config("csv", format!("line {line}: {msg}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
    let names: Vec<&str> = header.split(',').collect();
    if names.first() != Some(&"t") || names.len() < 2 {
        return Err(bad(
            1,
            "header must start with t and name at least one column".into(),
        ));
    }
    let mut times = Vec::new();
    let mut columns: Vec<Column> = names[1..]
        .iter()
        .map(|n| Column::new(*n, Vec::new()))
        .collect();
    for (k, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(bad(
                k + 2,
                format!("expected {} fields, got {}", names.len(), fields.len()),
            ));
        }
        let mut parsed = fields.iter().map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|e| bad(k + 2, format!("'{f}': {e}")))
        });
        times.push(parsed.next().unwrap()?);
        for (col, v) in columns.iter_mut().zip(parsed) {
            col.values.push(v?);
        }
    }
    Ok(Table { times, columns })
}

pub fn load_csv(path: &Path) -> CliResult<Table> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_csv(&text)
}
