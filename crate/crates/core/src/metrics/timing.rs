use std::hint::black_box;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::stats::median;
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::screeners::{run_screener, Screener};
use crate::simgen::replicate_rng;

/// Smallest number of timed repetitions per grid point.
pub const MIN_REPETITIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingPoint {
    pub n: usize,
    pub p: usize,
    pub d: usize,
    /// Median wall time of screening plus top-`d` selection.
    pub seconds: f64,
}

/// Times a screener over a grid of `(n, p, d)` points.
///
/// Each point gets a fresh i.i.d. Gaussian design with a five-variable
/// response, one untimed warm-up, then `max(repetitions, 5)` timed runs
/// whose median is reported. Runs sequentially on the calling thread.
pub fn timing_run(
    screener: &Screener,
    grid: &[(usize, usize, usize)],
    repetitions: usize,
    seed: u64,
) -> Result<Vec<TimingPoint>> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "need at least one grid point"));
    }
    let reps = repetitions.max(MIN_REPETITIONS);
    grid.iter()
        .enumerate()
        .map(|(k, &(n, p, d))| {
            let mut rng = replicate_rng(seed, k as u64);
            let x = DataMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal));
            let y: Vec<f64> = (0..n)
                .map(|i| x.row(i)[..5.min(p)].iter().sum::<f64>() + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let once = || -> Result<f64> {
                let start = Instant::now();
                let out = run_screener(black_box(&x), black_box(&y), screener, d, seed)?;
                black_box(out.top(d)?);
                Ok(start.elapsed().as_secs_f64())
            };
            once()?;
            let times = (0..reps).map(|_| once()).collect::<Result<Vec<f64>>>()?;
            Ok(TimingPoint {
                n,
                p,
                d,
                seconds: median(&times).expect("at least one repetition"),
            })
        })
        .collect()
}
