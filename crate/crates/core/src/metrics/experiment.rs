use std::time::Instant;

use log::warn;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::selection::{score_selection, SelectionMetrics};
use super::stats::{RunningStats, Summary};
use crate::error::{Error, Result, Warning};
use crate::modelselect::{run_pipeline, PipelineSpec, Refiner, SubmodelRule};
use crate::screeners::Screener;
use crate::simgen::{replicate_rng, simulate_replicate, SimScenario};

/// Mixed into the scenario seed to get the stream that seeds Divide-HOLP's
/// row shuffle, keeping it apart from the data streams.
const SHUFFLE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Everything recorded for one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub metrics: SelectionMetrics,
    /// Truth contained in the screened submodel.
    pub included: bool,
    /// Screening consistency; `None` when the screener has no scores.
    pub separated: Option<bool>,
    pub warnings: Vec<Warning>,
}

/// Monte-Carlo aggregate of one (scenario, pipeline) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: SimScenario,
    pub method: String,
    pub replicates: usize,
    pub false_negatives: Summary,
    pub false_positives: Summary,
    pub coverage: Summary,
    pub exact: Summary,
    pub size: Summary,
    pub l2_error: Option<Summary>,
    pub wall_time_s: Summary,
    pub inclusion_probability: f64,
    pub separation_probability: Option<f64>,
    pub warnings: usize,
}

/// Strict screening consistency: every true score beats every other score.
///
/// An empty truth cannot separate and yields `false` with a warning.
pub fn separates(scores: &[f64], support: &[usize]) -> bool {
    if support.is_empty() {
        warn!("separation is undefined for an empty support; counted as failure");
        return false;
    }
    let mut is_true = vec![false; scores.len()];
    support.iter().for_each(|&j| is_true[j] = true);
    let min_true = support.iter().map(|&j| scores[j]).fold(f64::INFINITY, f64::min);
    let max_false = scores
        .iter()
        .zip(&is_true)
        .filter(|(_, &t)| !t)
        .map(|(&s, _)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    min_true > max_false
}

fn run_replicate(scenario: &SimScenario, spec: &PipelineSpec, index: u64) -> Result<ReplicateOutcome> {
    let data = simulate_replicate(scenario, index)?;
    let shuffle_seed = replicate_rng(scenario.seed ^ SHUFFLE_SALT, index).next_u64();
    let start = Instant::now();
    let out = run_pipeline(&data.x, &data.y, spec, shuffle_seed)?;
    let elapsed = start.elapsed().as_secs_f64();
    let fit = (spec.refiner != Refiner::None).then_some(&out.fit);
    let mut metrics = score_selection(&out.fit.support, fit, &data);
    metrics.wall_time_s = elapsed;
    let included = data.support.iter().all(|j| out.screened.indices.contains(j));
    let separated = out.scores.as_ref().map(|s| separates(&s.scores, &data.support));
    Ok(ReplicateOutcome {
        metrics,
        included,
        separated,
        warnings: out.warnings,
    })
}

/// Runs every replicate on the current rayon pool, in replicate order.
///
/// The first failing replicate (by index) aborts the experiment.
pub fn run_replicates(scenario: &SimScenario, spec: &PipelineSpec, replicates: usize) -> Result<Vec<ReplicateOutcome>> {
    if replicates == 0 {
        return Err(Error::invalid("replicates", "need at least one replicate"));
    }
    scenario.validate()?;
    let results: Vec<Result<ReplicateOutcome>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| run_replicate(scenario, spec, r))
        .collect();
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Replicate {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

fn fraction(flags: impl Iterator<Item = bool>) -> f64 {
    let (mut hit, mut total) = (0usize, 0usize);
    for f in flags {
        hit += f as usize;
        total += 1;
    }
    hit as f64 / total as f64
}

/// Aggregates replicate outcomes into a report.
pub fn aggregate(scenario: &SimScenario, spec: &PipelineSpec, outcomes: &[ReplicateOutcome]) -> ExperimentReport {
    let summary = |f: &dyn Fn(&SelectionMetrics) -> f64| -> Summary {
        outcomes.iter().map(|o| f(&o.metrics)).collect::<RunningStats>().summary()
    };
    let l2: RunningStats = outcomes.iter().filter_map(|o| o.metrics.l2_error).collect();
    let separation = outcomes
        .iter()
        .map(|o| o.separated)
        .collect::<Option<Vec<bool>>>()
        .map(|v| fraction(v.into_iter()));
    ExperimentReport {
        scenario: *scenario,
        method: spec.label(),
        replicates: outcomes.len(),
        false_negatives: summary(&|m| m.false_negatives as f64),
        false_positives: summary(&|m| m.false_positives as f64),
        coverage: summary(&|m| m.covered as u8 as f64),
        exact: summary(&|m| m.exact as u8 as f64),
        size: summary(&|m| m.size as f64),
        l2_error: (l2.count() > 0).then(|| l2.summary()),
        wall_time_s: summary(&|m| m.wall_time_s),
        inclusion_probability: fraction(outcomes.iter().map(|o| o.included)),
        separation_probability: separation,
        warnings: outcomes.iter().map(|o| o.warnings.len()).sum(),
    }
}

/// Simulates `replicates` data sets and runs the pipeline on each.
pub fn run_experiment(scenario: &SimScenario, spec: &PipelineSpec, replicates: usize) -> Result<ExperimentReport> {
    let outcomes = run_replicates(scenario, spec, replicates)?;
    Ok(aggregate(scenario, spec, &outcomes))
}

/// Fraction of replicates whose top-`d` screened set contains the truth.
pub fn inclusion_probability(
    scenario: &SimScenario,
    screener: &Screener,
    d: usize,
    replicates: usize,
) -> Result<ExperimentReport> {
    let spec = PipelineSpec {
        screener: *screener,
        submodel: SubmodelRule::TopD(d),
        refiner: Refiner::None,
    };
    run_experiment(scenario, &spec, replicates)
}

/// Fraction of replicates where every true score strictly beats every
/// other score.
pub fn separation_probability(scenario: &SimScenario, screener: &Screener, replicates: usize) -> Result<f64> {
    if !screener.produces_scores() {
        return Err(Error::invalid("screener", "separation needs a screener that produces scores"));
    }
    let report = inclusion_probability(scenario, screener, scenario.design.sparsity(), replicates)?;
    Ok(report.separation_probability.expect("screener produces scores"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::Family;

    fn scenario() -> SimScenario {
        SimScenario {
            design: Family::CompoundSymmetry { rho: 0.3, support_size: None },
            n: 40,
            p: 200,
            r_squared: 0.9,
            seed: 5,
        }
    }

    #[test]
    fn strict_separation() {
        assert!(separates(&[3.0, 1.0, 2.0], &[0, 2]));
        assert!(!separates(&[3.0, 2.0, 2.0], &[0, 2]));
        assert!(!separates(&[3.0, 2.0], &[]));
    }

    #[test]
    fn separation_implies_inclusion() {
        let sc = scenario();
        let spec = PipelineSpec {
            screener: Screener::Holp,
            submodel: SubmodelRule::TopD(5),
            refiner: Refiner::None,
        };
        let out = run_replicates(&sc, &spec, 30).unwrap();
        for o in &out {
            if o.separated == Some(true) {
                assert!(o.included);
            }
        }
    }

    #[test]
    fn report_is_consistent() {
        let sc = scenario();
        let report = inclusion_probability(&sc, &Screener::Sis, 40, 20).unwrap();
        assert_eq!(report.replicates, 20);
        assert!((0.0..=1.0).contains(&report.inclusion_probability));
        assert!((report.inclusion_probability - report.coverage.mean).abs() < 1e-12);
        assert_eq!(report.size.mean, 40.0);
        assert!(report.l2_error.is_none());
        assert_eq!(report.method, "sis+top40+none");
    }

    #[test]
    fn failing_replicate_is_named() {
        let sc = scenario();
        let spec = PipelineSpec {
            screener: Screener::Holp,
            submodel: SubmodelRule::EbicSized(39),
            refiner: Refiner::LassoEbic,
        };
        let err = run_replicates(&sc, &spec, 3).unwrap_err();
        assert!(matches!(err, Error::Replicate { index: 0, .. }));
    }

    #[test]
    fn no_scores_no_separation() {
        let divide = Screener::DivideHolp { partitions: 2 };
        let report = inclusion_probability(&scenario(), &divide, 10, 4).unwrap();
        assert_eq!(report.separation_probability, None);
        assert!(separation_probability(&scenario(), &divide, 4).is_err());
    }
}
