//! CSV ingestion for real-data analyses.
//!
//! The first row is a header. Rows with a missing cell (empty, `NA` or
//! `NaN`, any case) are dropped and counted; any other cell that is not a
//! number is an error naming its data row (1-based, header excluded) and
//! column.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use holp_core::DataMatrix;
use log::warn;
use thiserror::Error;

pub const MIN_ROWS: usize = 3;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("response column '{0}' not found in header")]
    MissingResponse(String),
    #[error("row {row}, column '{column}': cannot parse '{value}' as a number")]
    Parse { row: usize, column: String, value: String },
    #[error("need at least {MIN_ROWS} complete rows, found {found} ({rejected} rejected for missing values)")]
    TooFewRows { found: usize, rejected: usize },
    #[error("no predictor columns besides the response")]
    NoPredictors,
    #[error("top-variance filter needs k >= 1")]
    ZeroTopK,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadOptions {
    pub response: String,
    /// Keep only the `k` predictors with the largest sample variance.
    pub top_variance: Option<usize>,
    /// Center predictors and scale them to unit sample variance.
    pub standardize: bool,
}

impl LoadOptions {
    pub fn new(response: impl Into<String>) -> Self {
        Self {
            response: response.into(),
            top_variance: None,
            standardize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    /// Predictor names, aligned with the columns of `x`.
    pub names: Vec<String>,
    pub response: String,
    pub x: DataMatrix,
    pub y: Vec<f64>,
    /// Rows dropped for missing values.
    pub rejected_rows: usize,
}

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c.eq_ignore_ascii_case("na") || c.eq_ignore_ascii_case("nan")
}

fn sample_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (n - 1.0)
}

pub fn load_csv(path: &Path, opts: &LoadOptions) -> Result<TabularDataset, DatasetError> {
    let file = File::open(path).map_err(|source| DatasetError::Open {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(file, opts)
}

pub fn parse_csv(reader: impl Read, opts: &LoadOptions) -> Result<TabularDataset, DatasetError> {
    if opts.top_variance == Some(0) {
        return Err(DatasetError::ZeroTopK);
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_owned()).collect();
    let ycol = header
        .iter()
        .position(|h| *h == opts.response)
        .ok_or_else(|| DatasetError::MissingResponse(opts.response.clone()))?;
    let pcols: Vec<usize> = (0..header.len()).filter(|&c| c != ycol).collect();
    if pcols.is_empty() {
        return Err(DatasetError::NoPredictors);
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); pcols.len()];
    let mut y = Vec::new();
    let mut rejected = 0;
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        if record.iter().any(is_missing) {
            rejected += 1;
            continue;
        }
        let parse = |c: usize| -> Result<f64, DatasetError> {
            let cell = record[c].trim();
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DatasetError::Parse {
                    row: r + 1,
                    column: header[c].clone(),
                    value: cell.to_owned(),
                })
        };
        let row: Vec<f64> = (0..header.len()).map(parse).collect::<Result<_, _>>()?;
        y.push(row[ycol]);
        for (k, &c) in pcols.iter().enumerate() {
            columns[k].push(row[c]);
        }
    }
    if rejected > 0 {
        warn!("dropped {rejected} row(s) with missing values");
    }
    let n = y.len();
    if n < MIN_ROWS {
        return Err(DatasetError::TooFewRows { found: n, rejected });
    }

    let mut keep: Vec<usize> = (0..pcols.len()).collect();
    if let Some(k) = opts.top_variance {
        let var: Vec<f64> = columns.iter().map(|c| sample_variance(c)).collect();
        keep.sort_by(|&a, &b| var[b].total_cmp(&var[a]));
        keep.truncate(k);
        keep.sort_unstable();
    }
    if opts.standardize {
        for &k in &keep {
            let col = &mut columns[k];
            let m = col.iter().sum::<f64>() / n as f64;
            let sd = sample_variance(col).sqrt();
            if sd > 0.0 {
                col.iter_mut().for_each(|v| *v = (*v - m) / sd);
            } else {
                warn!("predictor '{}' is constant; centered only", header[pcols[k]]);
                col.iter_mut().for_each(|v| *v -= m);
            }
        }
    }
    let x = DataMatrix::from_fn(n, keep.len(), |i, j| columns[keep[j]][i]);
    Ok(TabularDataset {
        names: keep.iter().map(|&k| header[pcols[k]].clone()).collect(),
        response: opts.response.clone(),
        x,
        y,
        rejected_rows: rejected,
    })
}
