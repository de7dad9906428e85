//! Library side of the `holp` command-line tool: experiment configs, CSV
//! ingestion, campaign execution, report writing and SVG figures.

pub mod campaign;
pub mod config;
pub mod dataset;
pub mod report;
pub mod svg;

pub use campaign::{run_campaign, CampaignError, CampaignOptions, CampaignOutcome};
pub use config::{ConfigError, Experiment, ExperimentConfig, ScenarioSpec, SCHEMA_VERSION};
pub use dataset::{load_csv, parse_csv, DatasetError, LoadOptions, TabularDataset};
pub use report::{read_report, ReportRow, ReportWriter};
pub use svg::{emit_curves, emit_heatmap, render_curves, render_heatmap, Series, SvgError};
