//! Plot-ready two-column `.dat` files, one per curve and metric, plus a
//! plain-text index. Values are seed means.

use std::fmt::Write as _;
use std::path::Path;

use super::csv::format_sig;
use crate::error::{Error, Result};
use crate::sim::experiment::Curve;
use crate::sim::{Algorithm, ExperimentKind, ExperimentTable, PrivacyMode};

pub const PLOT_INDEX: &str = "index.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    ReductionRate,
    TaskMultiplier,
}

impl Metric {
    fn describe(self) -> &'static str {
        match self {
            Metric::ReductionRate => "average latency reduction rate",
            Metric::TaskMultiplier => "task multiplier",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotFile {
    pub name: String,
    pub metric: Metric,
    pub algorithm: Algorithm,
    pub privacy: PrivacyMode,
    pub epsilon: f64,
}

/// File names for the given curves, grouped by figure. Experiments map to
/// figures 2-3, 4-5 and 6-9; a single run uses `run_*` names. Curves are
/// ordered by algorithm, privacy mode and budget whatever the input order.
pub fn plot_layout(kind: Option<ExperimentKind>, curves: &[(Algorithm, PrivacyMode, f64)]) -> Vec<PlotFile> {
    let file = |name: String, metric, &(algorithm, privacy, epsilon): &(Algorithm, PrivacyMode, f64)| PlotFile {
        name,
        metric,
        algorithm,
        privacy,
        epsilon,
    };
    let mut curves = curves.to_vec();
    curves.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
    let curves = &curves[..];
    let metrics = [Metric::ReductionRate, Metric::TaskMultiplier];
    let mut out = Vec::new();
    match kind {
        Some(ExperimentKind::PrivacyModes) | Some(ExperimentKind::Algorithms) => {
            let first = if kind == Some(ExperimentKind::PrivacyModes) { 2 } else { 4 };
            for (i, metric) in metrics.into_iter().enumerate() {
                for c in curves {
                    let curve = if first == 2 { c.1.to_string() } else { c.0.to_string() };
                    out.push(file(format!("fig{}_{curve}.dat", first + i), metric, c));
                }
            }
        }
        Some(ExperimentKind::BudgetSweep) => {
            for (first, privacy) in [(6, PrivacyMode::Rr), (8, PrivacyMode::Ldp)] {
                for (i, metric) in metrics.into_iter().enumerate() {
                    for c in curves.iter().filter(|c| c.1 == privacy) {
                        out.push(file(format!("fig{}_eps{}.dat", first + i, c.2), metric, c));
                    }
                }
            }
        }
        None => {
            for (tag, metric) in [("rate", Metric::ReductionRate), ("multiplier", Metric::TaskMultiplier)] {
                for c in curves {
                    out.push(file(format!("run_{tag}_{}_{}_eps{}.dat", c.0, c.1, c.2), metric, c));
                }
            }
        }
    }
    out
}

fn dat(curve: &Curve, metric: Metric) -> String {
    let mut s = format!("# step {}\n", metric.describe().replace(' ', "_"));
    for &(step, rate, mult) in &curve.points {
        let v = match metric {
            Metric::ReductionRate => rate,
            Metric::TaskMultiplier => mult,
        };
        if let Some(v) = v {
            let _ = writeln!(s, "{step} {}", format_sig(v));
        }
    }
    s
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes every curve file and the index into `out_dir`; returns the file
/// names written, index last.
pub fn emit_plot_data(table: &ExperimentTable, out_dir: &Path) -> Result<Vec<String>> {
    if table.cells.is_empty() {
        return Err(Error::InvalidParameter("no experiment cells to plot".into()));
    }
    let curves = table.curves();
    let keys: Vec<_> = curves.iter().map(|c| (c.algorithm, c.privacy, c.epsilon)).collect();
    let seeds = table.cells.len() / curves.len().max(1);
    let mut index = String::new();
    let mut names = Vec::new();
    for f in plot_layout(table.kind, &keys) {
        let curve = curves
            .iter()
            .find(|c| (c.algorithm, c.privacy, c.epsilon) == (f.algorithm, f.privacy, f.epsilon))
            .expect("layout only names existing curves");
        write(&out_dir.join(&f.name), &dat(curve, f.metric))?;
        let _ = writeln!(
            index,
            "{}: {} per step, algorithm {}, privacy {}, epsilon {}, mean over {seeds} seed(s)",
            f.name,
            f.metric.describe(),
            f.algorithm,
            f.privacy,
            f.epsilon
        );
        names.push(f.name);
    }
    write(&out_dir.join(PLOT_INDEX), &index)?;
    names.push(PLOT_INDEX.to_string());
    Ok(names)
}
