//! Metrics CSV: one row per (cell, step), sorted by label then step.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::ExperimentTable;

pub const CSV_HEADER: &str =
    "experiment,algorithm,privacy,epsilon,seed,step,time_s,avg_reduction_rate,completed_tasks,task_multiplier";

/// Fixed-point rendering with 9 significant digits.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{:.8}", if v == 0.0 { 0.0 } else { v });
    }
    let sci = format!("{v:.8e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (8 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_sig).unwrap_or_default()
}

/// The CSV text for every cell of `table`.
pub fn metrics_csv(table: &ExperimentTable) -> String {
    let mut cells: Vec<_> = table.cells.iter().collect();
    cells.sort_by(|a, b| a.label.sort_cmp(&b.label));
    let mut out = String::with_capacity(64 * cells.iter().map(|c| c.series.records.len()).sum::<usize>() + 128);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for cell in cells {
        let l = &cell.label;
        for r in &cell.series.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                l.experiment,
                l.algorithm,
                l.privacy,
                format_sig(l.epsilon),
                l.seed,
                r.step,
                format_sig(r.time_s),
                opt(r.avg_reduction_rate),
                r.completed_tasks,
                opt(r.task_multiplier)
            );
        }
    }
    out
}

pub fn write_metrics_csv(table: &ExperimentTable, path: &Path) -> Result<()> {
    std::fs::write(path, metrics_csv(table)).map_err(|e| Error::io(path, e))
}

/// A parsed CSV row; empty numeric fields become `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub experiment: String,
    pub algorithm: String,
    pub privacy: String,
    pub epsilon: f64,
    pub seed: u64,
    pub step: u64,
    pub time_s: f64,
    pub avg_reduction_rate: Option<f64>,
    pub completed_tasks: u64,
    pub task_multiplier: Option<f64>,
}

pub fn parse_metrics_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(Error::ConfigParse { line: 1, message: "missing or unexpected CSV header".into() }),
    }
    lines
        .map(|(i, line)| {
            let bad = |what: &str| Error::ConfigParse { line: i + 1, message: format!("bad {what}") };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(bad("field count"));
            }
            let real = |s: &str, what: &str| s.parse::<f64>().map_err(|_| bad(what));
            let int = |s: &str, what: &str| s.parse::<u64>().map_err(|_| bad(what));
            let maybe = |s: &str, what: &str| if s.is_empty() { Ok(None) } else { real(s, what).map(Some) };
            Ok(CsvRow {
                experiment: f[0].to_string(),
                algorithm: f[1].to_string(),
                privacy: f[2].to_string(),
                epsilon: real(f[3], "epsilon")?,
                seed: int(f[4], "seed")?,
                step: int(f[5], "step")?,
                time_s: real(f[6], "time_s")?,
                avg_reduction_rate: maybe(f[7], "avg_reduction_rate")?,
                completed_tasks: int(f[8], "completed_tasks")?,
                task_multiplier: maybe(f[9], "task_multiplier")?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sig(0.0), "0.00000000");
        assert_eq!(format_sig(1.0), "1.00000000");
        assert_eq!(format_sig(0.866213), "0.866213000");
        assert_eq!(format_sig(123.456), "123.456000");
        assert_eq!(format_sig(9.9999999996), "10.0000000");
        assert_eq!(format_sig(-0.00123456789012), "-0.00123456789");
        assert_eq!(format_sig(5e9), "5000000000");
    }

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(metrics_csv(&ExperimentTable::default()), format!("{CSV_HEADER}\n"));
        assert!(parse_metrics_csv(&metrics_csv(&ExperimentTable::default())).unwrap().is_empty());
    }
}
