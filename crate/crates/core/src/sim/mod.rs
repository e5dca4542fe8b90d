//! Scenario generation, the step loop, metrics and the experiment harness.

pub mod config;
pub mod engine;
pub mod experiment;
pub mod metrics;
pub mod privacy;
pub mod scenario;

pub use config::{Algorithm, PrivacyMode, Range, ScenarioConfig};
pub use engine::{run, shadow_config, simulate, DecisionRecord, Simulation};
pub use experiment::{run_experiment, CellLabel, ExperimentCell, ExperimentKind, ExperimentTable};
pub use metrics::{task_multiplier, MetricsSeries, RunTrace, StepRecord, TraceRecord};
pub use scenario::{generate_scenario, Scenario, TaskGenerator};
