use log::warn;
use serde::{Deserialize, Serialize};

use super::{ebic, lambda_grid, lambda_max, lasso_path_with, mean, ols_refit, total_ss, FitResult, LassoOptions};
use crate::error::{Error, Result, Warning};
use crate::matrix::{dot, DataMatrix};
use crate::screeners::{rank_select, run_screener, threshold_select, Screened, Screener, ScreeningScores, SelectionRule, SubmodelSelection};

/// Number of penalties on the Lasso grid.
pub const LASSO_GRID_SIZE: usize = 100;
/// Smallest penalty on the grid, relative to `lambda_max`.
pub const LASSO_GRID_RATIO: f64 = 1e-3;

/// RSS values below this fraction of the total sum of squares are treated
/// as an exact fit when sizing submodels by EBIC.
const EXACT_FIT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubmodelRule {
    /// Keep the top `d`; `TopD(0)` is the intercept-only model.
    TopD(usize),
    /// Keep every variable scoring at least `gamma`.
    Threshold(f64),
    /// Choose the size in `1..=dmax` by EBIC of OLS refits.
    EbicSized(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refiner {
    LassoEbic,
    Ols,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub screener: Screener,
    pub submodel: SubmodelRule,
    pub refiner: Refiner,
}

impl PipelineSpec {
    pub fn label(&self) -> String {
        let rule = match self.submodel {
            SubmodelRule::TopD(d) => format!("top{d}"),
            SubmodelRule::EbicSized(d) => format!("ebic{d}"),
            SubmodelRule::Threshold(g) => format!("thr{g}"),
        };
        let refiner = match self.refiner {
            Refiner::LassoEbic => "lasso-ebic",
            Refiner::Ols => "ols",
            Refiner::None => "none",
        };
        format!("{}+{rule}+{refiner}", self.screener.label())
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self.submodel {
            SubmodelRule::EbicSized(dmax) if dmax == 0 || dmax + 2 > n => {
                return Err(Error::invalid("dmax", format!("must lie in 1..={}, got {dmax}", n.saturating_sub(2))));
            }
            SubmodelRule::EbicSized(_) | SubmodelRule::Threshold(_) if !self.screener.produces_scores() => {
                return Err(Error::invalid("submodel", "this rule needs a screener that produces scores"));
            }
            SubmodelRule::TopD(d) if self.refiner == Refiner::Ols && d >= n => {
                return Err(Error::invalid("d", format!("an OLS refit needs d < n = {n}, got {d}")));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Outcome of [`ebic_size`].
#[derive(Debug, Clone, PartialEq)]
pub struct EbicSizing {
    pub selection: SubmodelSelection,
    /// EBIC per size `k = 1..=dmax` (`None` where the size was skipped).
    pub criterion: Vec<Option<f64>>,
    pub warnings: Vec<Warning>,
}

/// Picks the submodel size by EBIC over OLS refits of the top-`k` prefixes.
///
/// The prefixes are nested, so the refits are done incrementally with one
/// Gram-Schmidt step per added column. Once a prefix is rank deficient every
/// longer prefix is too, and all of them are skipped. Ties go to the
/// smaller `k`.
pub fn ebic_size(scores: &ScreeningScores, x: &DataMatrix, y: &[f64], dmax: usize) -> Result<EbicSizing> {
    let (n, p) = x.shape();
    if dmax == 0 || dmax + 2 > n {
        return Err(Error::invalid("dmax", format!("must lie in 1..={}, got {dmax}", n.saturating_sub(2))));
    }
    let ranked = rank_select(scores, dmax.min(scores.len()))?;
    let tss = total_ss(y);
    let floor = (EXACT_FIT_FLOOR * tss).max(f64::MIN_POSITIVE);

    let ybar = mean(y);
    let mut r: Vec<f64> = y.iter().map(|v| v - ybar).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut criterion = vec![None; dmax];
    let mut warnings = Vec::new();
    let mut broken: Option<usize> = None;

    for (k, &j) in ranked.indices.iter().enumerate() {
        let size = k + 1;
        if let Some(col) = broken {
            warnings.push(Warning::SkippedSubmodelSize {
                size,
                reason: format!("prefix contains dependent column {col}"),
            });
            continue;
        }
        let raw = x.column(j);
        let m = mean(&raw);
        let mut v: Vec<f64> = raw.iter().map(|a| a - m).collect();
        let norm0 = dot(&v, &v).sqrt();
        for _ in 0..2 {
            for b in &basis {
                let proj = dot(b, &v);
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= proj * bi);
            }
        }
        let nv = dot(&v, &v).sqrt();
        if norm0 == 0.0 || nv <= 1e-10 * norm0 {
            warn!("EBIC sizing: column {j} is dependent on higher-ranked columns");
            broken = Some(j);
            warnings.push(Warning::SkippedSubmodelSize {
                size,
                reason: format!("column {j} is linearly dependent"),
            });
            continue;
        }
        v.iter_mut().for_each(|vi| *vi /= nv);
        let proj = dot(&v, &r);
        r.iter_mut().zip(&v).for_each(|(ri, vi)| *ri -= proj * vi);
        basis.push(v);
        let rss = dot(&r, &r).max(floor);
        criterion[k] = Some(ebic(rss, n, p, size)?);
    }
    for (k, slot) in criterion.iter().enumerate().skip(ranked.len()) {
        debug_assert!(slot.is_none());
        warnings.push(Warning::SkippedSubmodelSize {
            size: k + 1,
            reason: "fewer positive scores than the requested size".into(),
        });
    }

    let best = criterion
        .iter()
        .enumerate()
        .filter_map(|(k, c)| c.map(|v| (k, v)))
        .fold(None, |acc: Option<(usize, f64)>, (k, v)| match acc {
            Some((_, bv)) if bv <= v => acc,
            _ => Some((k, v)),
        });
    let size = best.map_or(0, |(k, _)| k + 1);
    Ok(EbicSizing {
        selection: SubmodelSelection {
            indices: ranked.indices[..size].to_vec(),
            rule: SelectionRule::TopD(size),
        },
        criterion,
        warnings,
    })
}

/// Result of a two-stage fit; `fit.support` indexes the original columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineFit {
    /// Screening scores, when the screener produces them.
    pub scores: Option<ScreeningScores>,
    pub screened: SubmodelSelection,
    pub fit: FitResult,
    pub warnings: Vec<Warning>,
}

/// Screen, pick a submodel, refine.
///
/// With `Refiner::None` the fit carries the screened set as its support,
/// no coefficients, and the intercept-only RSS. `shuffle_seed` feeds
/// Divide-HOLP's row partition.
pub fn run_pipeline(x: &DataMatrix, y: &[f64], spec: &PipelineSpec, shuffle_seed: u64) -> Result<PipelineFit> {
    let (n, p) = x.shape();
    spec.validate(n).map_err(Error::in_stage("pipeline"))?;
    let mut warnings = Vec::new();

    let (screened, scores) = match spec.submodel {
        SubmodelRule::TopD(0) => (
            SubmodelSelection {
                indices: Vec::new(),
                rule: SelectionRule::TopD(0),
            },
            None,
        ),
        SubmodelRule::TopD(d) => {
            let out = run_screener(x, y, &spec.screener, d, shuffle_seed).map_err(Error::in_stage("screen"))?;
            let selection = out.top(d.min(p)).map_err(Error::in_stage("submodel"))?;
            match out {
                Screened::Scores(s) => {
                    warnings.extend(s.warnings.iter().cloned());
                    (selection, Some(s))
                }
                Screened::Selection(_) => (selection, None),
            }
        }
        SubmodelRule::Threshold(gamma) => {
            let out = run_screener(x, y, &spec.screener, n.saturating_sub(1), shuffle_seed)
                .map_err(Error::in_stage("screen"))?;
            let Screened::Scores(scores) = out else {
                unreachable!("validated: screener produces scores")
            };
            warnings.extend(scores.warnings.iter().cloned());
            let selection = threshold_select(&scores, gamma).map_err(Error::in_stage("submodel"))?;
            if spec.refiner == Refiner::Ols && selection.len() >= n {
                return Err(Error::Stage {
                    stage: "submodel",
                    source: Box::new(Error::invalid(
                        "gamma",
                        format!("{} variables pass the threshold; an OLS refit needs fewer than {n}", selection.len()),
                    )),
                });
            }
            (selection, Some(scores))
        }
        SubmodelRule::EbicSized(dmax) => {
            let out = run_screener(x, y, &spec.screener, dmax, shuffle_seed).map_err(Error::in_stage("screen"))?;
            let Screened::Scores(scores) = out else {
                unreachable!("validated: screener produces scores")
            };
            warnings.extend(scores.warnings.iter().cloned());
            let sizing = ebic_size(&scores, x, y, dmax).map_err(Error::in_stage("submodel"))?;
            warnings.extend(sizing.warnings);
            (sizing.selection, Some(scores))
        }
    };

    let fit = match spec.refiner {
        Refiner::None => {
            let ybar = mean(y);
            FitResult {
                support: screened.indices.clone(),
                coefficients: Vec::new(),
                intercept: ybar,
                rss: total_ss(y),
                lambda: 0.0,
            }
        }
        Refiner::Ols => ols_refit(x, y, &screened.indices).map_err(Error::in_stage("refine"))?,
        Refiner::LassoEbic => {
            let (fit, w) = lasso_ebic(x, y, &screened.indices, p).map_err(Error::in_stage("refine"))?;
            warnings.extend(w);
            fit
        }
    };
    Ok(PipelineFit {
        scores,
        screened,
        fit,
        warnings,
    })
}

/// Lasso path on the submodel; keeps the point minimising
/// `ebic(RSS, n, p, |active set|)` with `p` the full predictor count.
fn lasso_ebic(x: &DataMatrix, y: &[f64], columns: &[usize], p: usize) -> Result<(FitResult, Vec<Warning>)> {
    let n = x.rows();
    let intercept_only = || FitResult {
        support: Vec::new(),
        coefficients: Vec::new(),
        intercept: mean(y),
        rss: total_ss(y),
        lambda: 0.0,
    };
    if columns.is_empty() {
        return Ok((intercept_only(), Vec::new()));
    }
    let sub = x.select_columns(columns);
    let lmax = lambda_max(&sub, y);
    if !(lmax > 0.0) {
        return Ok((intercept_only(), Vec::new()));
    }
    let grid = lambda_grid(lmax, LASSO_GRID_SIZE, LASSO_GRID_RATIO);
    let opts = LassoOptions {
        early_stop: true,
        ..LassoOptions::default()
    };
    let path = lasso_path_with(&sub, y, &grid, &opts)?;
    let mut warnings = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for (k, fit) in path.iter().enumerate() {
        match ebic(fit.rss, n, p, fit.support.len()) {
            Ok(v) => {
                if best.is_none_or(|(_, bv)| v < bv) {
                    best = Some((k, v));
                }
            }
            Err(e) => warnings.push(Warning::SkippedLambda {
                index: k,
                reason: e.to_string(),
            }),
        }
    }
    let fit = match best {
        Some((k, _)) => path[k].clone().remap(columns),
        None => intercept_only(),
    };
    Ok((fit, warnings))
}
