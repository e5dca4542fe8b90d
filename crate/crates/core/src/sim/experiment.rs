//! The three experiment harnesses. Cells are independent and run in
//! parallel; results come back in a fixed order.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, PrivacyMode, ScenarioConfig};
use super::engine::run;
use super::metrics::MetricsSeries;
use crate::error::{Error, Result};

/// Budget used for the privacy-mode and algorithm comparisons.
pub const COMPARISON_EPSILON: f64 = 5.0;
pub const BUDGET_SWEEP: [f64; 4] = [1.0, 5.0, 10.0, 20.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    /// Privacy modes none, rr, ldp with branch-and-bound.
    PrivacyModes,
    /// rm, cm, bm, bnb under ldp.
    Algorithms,
    /// Budget sweep for rr and ldp with branch-and-bound.
    BudgetSweep,
}

impl ExperimentKind {
    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            1 => Ok(Self::PrivacyModes),
            2 => Ok(Self::Algorithms),
            3 => Ok(Self::BudgetSweep),
            _ => Err(Error::Usage(format!("experiment kind must be 1, 2 or 3, got {n}"))),
        }
    }

    pub fn number(self) -> u32 {
        match self {
            Self::PrivacyModes => 1,
            Self::Algorithms => 2,
            Self::BudgetSweep => 3,
        }
    }

    /// `(algorithm, privacy, epsilon)` for each curve of the experiment.
    pub fn variants(self, base: &ScenarioConfig) -> Vec<(Algorithm, PrivacyMode, f64)> {
        match self {
            Self::PrivacyModes => [PrivacyMode::None, PrivacyMode::Rr, PrivacyMode::Ldp]
                .into_iter()
                .map(|p| (Algorithm::Bnb, p, COMPARISON_EPSILON))
                .collect(),
            Self::Algorithms => [Algorithm::Rm, Algorithm::Cm, Algorithm::Bm, Algorithm::Bnb]
                .into_iter()
                .map(|a| (a, PrivacyMode::Ldp, base.privacy.epsilon))
                .collect(),
            Self::BudgetSweep => [PrivacyMode::Rr, PrivacyMode::Ldp]
                .into_iter()
                .flat_map(|p| BUDGET_SWEEP.map(|e| (Algorithm::Bnb, p, e)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellLabel {
    /// `exp1`..`exp3`, or `run` for a single configuration.
    pub experiment: String,
    pub algorithm: Algorithm,
    pub privacy: PrivacyMode,
    pub epsilon: f64,
    pub seed: u64,
}

impl CellLabel {
    pub fn of(experiment: &str, cfg: &ScenarioConfig) -> Self {
        Self {
            experiment: experiment.to_string(),
            algorithm: cfg.optimizer.algorithm,
            privacy: cfg.privacy.mode,
            epsilon: cfg.privacy.epsilon,
            seed: cfg.seed,
        }
    }

    /// Sort order of emitted rows: experiment, algorithm, privacy, epsilon, seed.
    pub fn sort_cmp(&self, other: &Self) -> Ordering {
        self.experiment
            .cmp(&other.experiment)
            .then_with(|| self.algorithm.as_str().cmp(other.algorithm.as_str()))
            .then_with(|| self.privacy.as_str().cmp(other.privacy.as_str()))
            .then_with(|| self.epsilon.total_cmp(&other.epsilon))
            .then_with(|| self.seed.cmp(&other.seed))
    }

    /// The curve this cell contributes to, ignoring the seed.
    pub fn same_curve(&self, other: &Self) -> bool {
        self.experiment == other.experiment
            && self.algorithm == other.algorithm
            && self.privacy == other.privacy
            && self.epsilon == other.epsilon
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentCell {
    pub label: CellLabel,
    pub config: ScenarioConfig,
    pub series: MetricsSeries,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentTable {
    pub kind: Option<ExperimentKind>,
    pub cells: Vec<ExperimentCell>,
}

/// Seed-averaged values of one curve at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub algorithm: Algorithm,
    pub privacy: PrivacyMode,
    pub epsilon: f64,
    /// `(step, mean avg reduction rate, mean task multiplier)`; a mean is
    /// `None` when no seed has data at that step.
    pub points: Vec<(u64, Option<f64>, Option<f64>)>,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values.flatten().fold((0.0, 0u32), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / f64::from(n))
}

impl ExperimentTable {
    pub fn find(&self, algorithm: Algorithm, privacy: PrivacyMode, epsilon: f64, seed: u64) -> Option<&ExperimentCell> {
        self.cells.iter().find(|c| {
            c.label.algorithm == algorithm && c.label.privacy == privacy && c.label.epsilon == epsilon && c.label.seed == seed
        })
    }

    /// One curve per distinct label ignoring seeds, in first-seen order.
    /// Shorter series are padded with their final record.
    pub fn curves(&self) -> Vec<Curve> {
        let mut groups: Vec<Vec<&ExperimentCell>> = Vec::new();
        for cell in &self.cells {
            match groups.iter_mut().find(|g| g[0].label.same_curve(&cell.label)) {
                Some(g) => g.push(cell),
                None => groups.push(vec![cell]),
            }
        }
        groups
            .into_iter()
            .map(|g| {
                let len = g.iter().map(|c| c.series.records.len()).max().unwrap_or(0);
                let at = |c: &ExperimentCell, i: usize| c.series.records.get(i).or(c.series.records.last()).copied();
                let points = (0..len)
                    .map(|i| {
                        let rate = mean(g.iter().map(|c| at(c, i).and_then(|r| r.avg_reduction_rate)));
                        let mult = mean(g.iter().map(|c| at(c, i).and_then(|r| r.task_multiplier)));
                        (i as u64, rate, mult)
                    })
                    .collect();
                let l = &g[0].label;
                Curve {
                    algorithm: l.algorithm,
                    privacy: l.privacy,
                    epsilon: l.epsilon,
                    points,
                }
            })
            .collect()
    }
}

/// Runs every `(label, config)` cell in parallel; output keeps input order.
pub fn run_cells(cells: Vec<(CellLabel, ScenarioConfig)>) -> Result<Vec<ExperimentCell>> {
    cells
        .into_par_iter()
        .map(|(label, config)| {
            let series = run(&config)?;
            Ok(ExperimentCell { label, config, series })
        })
        .collect()
}

/// Configurations of every cell of experiment `kind`, in emission order.
pub fn experiment_cells(kind: ExperimentKind, base: &ScenarioConfig, seeds: &[u64]) -> Vec<(CellLabel, ScenarioConfig)> {
    let name = format!("exp{}", kind.number());
    let mut cells: Vec<(CellLabel, ScenarioConfig)> = kind
        .variants(base)
        .into_iter()
        .flat_map(|(algorithm, privacy, epsilon)| {
            seeds.iter().map(move |&seed| {
                let mut c = base.clone();
                c.seed = seed;
                c.optimizer.algorithm = algorithm;
                c.privacy.mode = privacy;
                c.privacy.epsilon = epsilon;
                c
            })
        })
        .map(|c| (CellLabel::of(&name, &c), c))
        .collect();
    cells.sort_by(|a, b| a.0.sort_cmp(&b.0));
    cells
}

pub fn run_experiment(kind: ExperimentKind, base: &ScenarioConfig, seeds: &[u64]) -> Result<ExperimentTable> {
    base.validate()?;
    Ok(ExperimentTable {
        kind: Some(kind),
        cells: run_cells(experiment_cells(kind, base, seeds))?,
    })
}
