//! Run manifests: the resolved configuration and command behind a set of
//! output files. Executing a manifest writes the manifest first, then the
//! results, so replaying it reproduces every output byte for byte.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::csv::write_metrics_csv;
use super::plot::{emit_plot_data, plot_layout, PLOT_INDEX};
use crate::error::{Error, Result};
use crate::sim::experiment::{run_cells, run_experiment, CellLabel, ExperimentCell};
use crate::sim::{ExperimentKind, ExperimentTable, ScenarioConfig};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ManifestCommand {
    Run,
    Experiment { number: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: ManifestCommand,
    /// Resolved configuration; for experiments, the base that each cell overrides.
    pub config: ScenarioConfig,
    pub seeds: Vec<u64>,
    /// Files written next to the manifest.
    pub outputs: Vec<String>,
}

impl RunManifest {
    fn new(command: ManifestCommand, config: ScenarioConfig, seeds: Vec<u64>) -> Result<Self> {
        let kind = match command {
            ManifestCommand::Run => None,
            ManifestCommand::Experiment { number } => Some(ExperimentKind::from_number(number)?),
        };
        let curves = match kind {
            Some(k) => k.variants(&config),
            None => vec![(config.optimizer.algorithm, config.privacy.mode, config.privacy.epsilon)],
        };
        let mut outputs = vec![METRICS_FILE.to_string()];
        outputs.extend(plot_layout(kind, &curves).into_iter().map(|f| f.name));
        outputs.push(PLOT_INDEX.to_string());
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            config,
            seeds,
            outputs,
        })
    }

    /// A single run of `config` with its own seed.
    pub fn for_run(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let seed = config.seed;
        Self::new(ManifestCommand::Run, config, vec![seed])
    }

    pub fn for_experiment(kind: ExperimentKind, base: ScenarioConfig, seeds: Vec<u64>) -> Result<Self> {
        base.validate()?;
        if seeds.is_empty() {
            return Err(Error::Usage("an experiment needs at least one seed".into()));
        }
        Self::new(ManifestCommand::Experiment { number: kind.number() }, base, seeds)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| Error::InvalidParameter(format!("cannot serialize manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text).map_err(|e| Error::ConfigParse {
            line: e.line(),
            message: e.to_string(),
        })?;
        m.config.validate()?;
        Ok(m)
    }

    /// Computes the results without writing anything.
    pub fn compute(&self) -> Result<ExperimentTable> {
        match self.command {
            ManifestCommand::Run => {
                let label = CellLabel::of("run", &self.config);
                let cells: Vec<ExperimentCell> = run_cells(vec![(label, self.config.clone())])?;
                Ok(ExperimentTable { kind: None, cells })
            }
            ManifestCommand::Experiment { number } => {
                run_experiment(ExperimentKind::from_number(number)?, &self.config, &self.seeds)
            }
        }
    }

    /// Writes the manifest, runs, and writes every listed output into `out_dir`.
    pub fn execute(&self, out_dir: &Path) -> Result<ExperimentTable> {
        std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let path = out_dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.to_json()?).map_err(|e| Error::io(&path, e))?;
        let table = self.compute()?;
        write_metrics_csv(&table, &out_dir.join(METRICS_FILE))?;
        let mut written = vec![METRICS_FILE.to_string()];
        written.extend(emit_plot_data(&table, out_dir)?);
        if written != self.outputs {
            return Err(Error::Invariant(format!(
                "outputs {written:?} differ from the manifest's {:?}",
                self.outputs
            )));
        }
        Ok(table)
    }
}
