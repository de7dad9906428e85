//! `report.csv`: one row per experiment.
//!
//! Numbers are written in shortest round-trip form, so a row parses back to
//! the exact report. Wall-clock columns are left empty unless requested,
//! which keeps reports from identical configs byte-identical.

use std::io::Write;

use holp_core::metrics::Summary;
use holp_core::simgen::{Family, SimScenario};
use holp_core::ExperimentReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub series: Option<String>,
    pub x: Option<f64>,
    /// The design family as JSON.
    pub design: String,
    pub n: usize,
    pub p: usize,
    pub r_squared: f64,
    pub seed: u64,
    pub method: String,
    pub replicates: usize,
    pub inclusion_probability: f64,
    pub separation_probability: Option<f64>,
    pub fn_mean: f64,
    pub fn_sd: f64,
    pub fp_mean: f64,
    pub fp_sd: f64,
    pub coverage_mean: f64,
    pub coverage_sd: f64,
    pub exact_mean: f64,
    pub exact_sd: f64,
    pub size_mean: f64,
    pub size_sd: f64,
    pub l2_error_mean: Option<f64>,
    pub l2_error_sd: Option<f64>,
    pub wall_time_mean: Option<f64>,
    pub wall_time_sd: Option<f64>,
    pub warnings: usize,
}

pub const HEADER: [&str; 27] = [
    "label",
    "series",
    "x",
    "design",
    "n",
    "p",
    "r_squared",
    "seed",
    "method",
    "replicates",
    "inclusion_probability",
    "separation_probability",
    "fn_mean",
    "fn_sd",
    "fp_mean",
    "fp_sd",
    "coverage_mean",
    "coverage_sd",
    "exact_mean",
    "exact_sd",
    "size_mean",
    "size_sd",
    "l2_error_mean",
    "l2_error_sd",
    "wall_time_mean",
    "wall_time_sd",
    "warnings",
];

impl ReportRow {
    pub fn new(label: &str, series: Option<&str>, x: Option<f64>, r: &ExperimentReport, wall_time: bool) -> Self {
        let s = &r.scenario;
        Self {
            label: label.to_owned(),
            series: series.map(str::to_owned),
            x,
            design: serde_json::to_string(&s.design).expect("family serializes"),
            n: s.n,
            p: s.p,
            r_squared: s.r_squared,
            seed: s.seed,
            method: r.method.clone(),
            replicates: r.replicates,
            inclusion_probability: r.inclusion_probability,
            separation_probability: r.separation_probability,
            fn_mean: r.false_negatives.mean,
            fn_sd: r.false_negatives.sd,
            fp_mean: r.false_positives.mean,
            fp_sd: r.false_positives.sd,
            coverage_mean: r.coverage.mean,
            coverage_sd: r.coverage.sd,
            exact_mean: r.exact.mean,
            exact_sd: r.exact.sd,
            size_mean: r.size.mean,
            size_sd: r.size.sd,
            l2_error_mean: r.l2_error.map(|s| s.mean),
            l2_error_sd: r.l2_error.map(|s| s.sd),
            wall_time_mean: wall_time.then_some(r.wall_time_s.mean),
            wall_time_sd: wall_time.then_some(r.wall_time_s.sd),
            warnings: r.warnings,
        }
    }

    /// The report this row was written from. Wall time reads as zero when
    /// it was not recorded.
    pub fn to_report(&self) -> Result<ExperimentReport, serde_json::Error> {
        let design: Family = serde_json::from_str(&self.design)?;
        let pair = |mean, sd| Summary { mean, sd };
        Ok(ExperimentReport {
            scenario: SimScenario {
                design,
                n: self.n,
                p: self.p,
                r_squared: self.r_squared,
                seed: self.seed,
            },
            method: self.method.clone(),
            replicates: self.replicates,
            false_negatives: pair(self.fn_mean, self.fn_sd),
            false_positives: pair(self.fp_mean, self.fp_sd),
            coverage: pair(self.coverage_mean, self.coverage_sd),
            exact: pair(self.exact_mean, self.exact_sd),
            size: pair(self.size_mean, self.size_sd),
            l2_error: self.l2_error_mean.zip(self.l2_error_sd).map(|(m, s)| pair(m, s)),
            wall_time_s: pair(self.wall_time_mean.unwrap_or(0.0), self.wall_time_sd.unwrap_or(0.0)),
            inclusion_probability: self.inclusion_probability,
            separation_probability: self.separation_probability,
            warnings: self.warnings,
        })
    }
}

/// Writes the header immediately and flushes after every row, so a crash
/// leaves every finished experiment on disk.
pub struct ReportWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> ReportWriter<W> {
    pub fn new(sink: W) -> csv::Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
        inner.write_record(HEADER)?;
        inner.flush()?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, row: &ReportRow) -> csv::Result<()> {
        self.inner.serialize(row)?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.inner.into_inner().map_err(|e| e.into_error()).expect("flushed after every row")
    }
}

/// Parses a report written by [`ReportWriter`].
pub fn read_report(text: &str) -> csv::Result<Vec<ReportRow>> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}
