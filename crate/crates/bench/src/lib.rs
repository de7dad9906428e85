//! Shared fixtures for the benchmarks.

use holp_core::simgen::{draw_design, replicate_rng};
use holp_core::{DataMatrix, Family};

/// Gaussian design with a five-variable linear response.
pub fn fixture(n: usize, p: usize, seed: u64) -> (DataMatrix, Vec<f64>) {
    let mut rng = replicate_rng(seed, 0);
    let x = draw_design(&Family::Independent, n, p, None, &mut rng);
    let noise = draw_design(&Family::Independent, n, 1, None, &mut rng).into_vec();
    let y = (0..n)
        .map(|i| x.row(i)[..5.min(p)].iter().sum::<f64>() + noise[i])
        .collect();
    (x, y)
}
