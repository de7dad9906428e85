//! Config-driven Monte-Carlo campaigns.
//!
//! Output directory layout: `config.resolved.json` (written first),
//! `report.csv` (one row per finished experiment, flushed as it goes) and,
//! when experiments carry a `series`, `curves.svg`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use holp_core::metrics::run_experiment;
use holp_core::ExperimentReport;
use log::info;
use thiserror::Error;

use crate::config::{ConfigError, CurveMetric, ExperimentConfig};
use crate::report::{ReportRow, ReportWriter};
use crate::svg::{emit_curves, Series, SvgError};

pub const REPORT_FILE: &str = "report.csv";
pub const RESOLVED_FILE: &str = "config.resolved.json";
pub const CURVES_FILE: &str = "curves.svg";

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("writing report: {0}")]
    Csv(#[from] csv::Error),
    #[error("cannot build worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Svg(#[from] SvgError),
}

fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CampaignError {
    let context = context.into();
    move |source| CampaignError::Io { context, source }
}

#[derive(Debug, Clone, Default)]
pub struct CampaignOptions {
    pub out: PathBuf,
    /// Overrides the config's thread count.
    pub threads: Option<usize>,
    /// Overrides the config's global seed.
    pub seed: Option<u64>,
    /// Record wall-clock columns (makes reports run-dependent).
    pub wall_time: bool,
}

#[derive(Debug)]
pub struct ExperimentFailure {
    pub index: usize,
    pub label: String,
    pub error: holp_core::Error,
}

#[derive(Debug)]
pub struct CampaignOutcome {
    pub reports: Vec<(String, ExperimentReport)>,
    /// First failing experiment; the campaign stops there.
    pub failure: Option<ExperimentFailure>,
}

impl CampaignOutcome {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs every experiment in order on a pool of the configured size.
///
/// Configuration and I/O problems are errors; an experiment failure stops
/// the campaign and is returned in [`CampaignOutcome::failure`], after the
/// finished rows have been written.
pub fn run_campaign(config: &ExperimentConfig, opts: &CampaignOptions) -> Result<CampaignOutcome, CampaignError> {
    let mut config = config.clone();
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    if let Some(t) = opts.threads {
        config.threads = Some(t);
    }
    let resolved = config.resolve()?;
    let out = &opts.out;
    fs::create_dir_all(out).map_err(io(format!("creating {}", out.display())))?;
    fs::write(out.join(RESOLVED_FILE), resolved.to_json() + "\n").map_err(io("writing resolved config"))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolved.threads.unwrap_or(0))
        .build()?;
    let file = File::create(out.join(REPORT_FILE)).map_err(io("creating report"))?;
    let mut writer = ReportWriter::new(BufWriter::new(file))?;

    let mut outcome = CampaignOutcome {
        reports: Vec::new(),
        failure: None,
    };
    for (index, e) in resolved.experiments.iter().enumerate() {
        let label = e.resolved_label();
        info!("experiment {}/{}: {label}", index + 1, resolved.experiments.len());
        match pool.install(|| run_experiment(&e.sim_scenario(), &e.pipeline, e.replicates)) {
            Ok(report) => {
                writer.write(&ReportRow::new(label, e.series.as_deref(), e.x, &report, opts.wall_time))?;
                outcome.reports.push((label.to_owned(), report));
            }
            Err(error) => {
                outcome.failure = Some(ExperimentFailure {
                    index,
                    label: label.to_owned(),
                    error,
                });
                break;
            }
        }
    }
    drop(writer);
    write_curves(&resolved, &outcome, out)?;
    Ok(outcome)
}

fn curve_value(report: &ExperimentReport, metric: CurveMetric) -> Option<f64> {
    match metric {
        CurveMetric::Inclusion => Some(report.inclusion_probability),
        CurveMetric::Separation => report.separation_probability,
        CurveMetric::Coverage => Some(report.coverage.mean),
    }
}

fn write_curves(config: &ExperimentConfig, outcome: &CampaignOutcome, out: &Path) -> Result<(), CampaignError> {
    let mut by_series: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    let mut metrics = Vec::new();
    for (e, (_, report)) in config.experiments.iter().zip(&outcome.reports) {
        let (Some(series), Some(x)) = (e.series.as_deref(), e.x) else {
            continue;
        };
        let metric = e.metric.unwrap_or_default();
        if let Some(y) = curve_value(report, metric) {
            by_series.entry(series).or_default().push((x, y));
            if !metrics.contains(&metric) {
                metrics.push(metric);
            }
        }
    }
    if by_series.is_empty() {
        return Ok(());
    }
    let series: Vec<Series> = by_series
        .into_iter()
        .map(|(label, mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series {
                label: label.to_owned(),
                points,
            }
        })
        .collect();
    let y_label = match metrics.as_slice() {
        [CurveMetric::Separation] => "separation probability",
        [CurveMetric::Coverage] => "coverage",
        [CurveMetric::Inclusion] => "inclusion probability",
        _ => "probability",
    };
    emit_curves(&series, "x", y_label, &out.join(CURVES_FILE))?;
    Ok(())
}
