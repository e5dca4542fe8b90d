//! Configuration files, metrics CSV, plot data and run manifests.

pub mod config;
pub mod csv;
pub mod manifest;
pub mod plot;

pub use config::{config_to_toml, load_config, parse_config};
pub use csv::{format_sig, metrics_csv, parse_metrics_csv, write_metrics_csv, CsvRow, CSV_HEADER};
pub use manifest::{ManifestCommand, RunManifest, MANIFEST_FILE, METRICS_FILE};
pub use plot::{emit_plot_data, plot_layout, Metric, PlotFile, PLOT_INDEX};
