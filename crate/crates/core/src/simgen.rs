//! Seeded simulation designs with noise calibrated to a target R².
//!
//! Every replicate draws from its own ChaCha8 stream: the generator is
//! seeded with the scenario seed and the stream number is the replicate
//! index, so replicates are independent of each other and of scheduling
//! order. Frozen factor loadings use the reserved stream [`LOADINGS_STREAM`].
//!
//! Designs are generated row by row in O(np) (O(npk) for factors); no p×p
//! covariance is ever formed. Indices in this module are 0-based, so the
//! "first five predictors" are columns 0..5.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, DataMatrix};

/// Stream reserved for loadings shared across replicates.
pub const LOADINGS_STREAM: u64 = u64::MAX;

/// Number of leading predictors sharing group factors in [`Family::Group`].
pub const GROUP_WIDTH: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// Example (i): independent standard normals, random-sign coefficients.
    Independent,
    /// Example (ii): unit variances, constant correlation `rho`.
    CompoundSymmetry {
        rho: f64,
        /// Overrides the default 5 signals (all equal to 5).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        support_size: Option<usize>,
    },
    /// Example (iii): `cov(x_i, x_j) = rho^|i-j|`.
    Autoregressive {
        rho: f64,
        /// Overrides the default 3 signals; values cycle through (3, 1.5, 2)
        /// at columns 0, 3, 6, ...
        #[serde(default, skip_serializing_if = "Option::is_none")]
        support_size: Option<usize>,
    },
    /// Example (iv): `X = F Λᵀ + E` with `k` factors.
    Factor {
        k: usize,
        /// Draw Λ once per scenario seed instead of once per replicate.
        #[serde(default)]
        freeze_loadings: bool,
    },
    /// Example (v): three interleaved groups among the first 15 columns,
    /// within-group noise variance `delta2`.
    Group { delta2: f64 },
    /// Example (vi): near-duplicate signals and noise correlated with all of
    /// them.
    Extreme,
    /// Compound symmetry with the fifth signal marginally uncorrelated
    /// with the response.
    MarginalNull { rho: f64 },
}

impl Family {
    pub fn label(&self) -> String {
        match self {
            Family::Independent => "independent".into(),
            Family::CompoundSymmetry { rho, support_size } => match support_size {
                Some(s) => format!("cs(rho={rho},s={s})"),
                None => format!("cs(rho={rho})"),
            },
            Family::Autoregressive { rho, support_size } => match support_size {
                Some(s) => format!("ar(rho={rho},s={s})"),
                None => format!("ar(rho={rho})"),
            },
            Family::Factor { k, .. } => format!("factor(k={k})"),
            Family::Group { delta2 } => format!("group(delta2={delta2})"),
            Family::Extreme => "extreme".into(),
            Family::MarginalNull { rho } => format!("marginal-null(rho={rho})"),
        }
    }

    /// Number of nonzero coefficients.
    pub fn sparsity(&self) -> usize {
        match self {
            Family::CompoundSymmetry { support_size: Some(s), .. } => *s,
            Family::Autoregressive { support_size: Some(s), .. } => *s,
            Family::Autoregressive { .. } => 3,
            Family::Group { .. } => GROUP_WIDTH,
            _ => 5,
        }
    }

    /// Smallest `p` the design can be built with.
    pub fn min_predictors(&self) -> usize {
        match self {
            Family::Autoregressive { .. } => 3 * self.sparsity() - 2,
            Family::Group { .. } | Family::Extreme => GROUP_WIDTH,
            _ => self.sparsity(),
        }
    }

    fn validate(&self) -> Result<()> {
        let rho_ok = |rho: f64| (0.0..1.0).contains(&rho);
        match *self {
            Family::CompoundSymmetry { rho, .. } | Family::Autoregressive { rho, .. } | Family::MarginalNull { rho }
                if !rho_ok(rho) =>
            {
                Err(Error::invalid("rho", format!("must lie in [0, 1), got {rho}")))
            }
            Family::CompoundSymmetry { support_size: Some(0), .. }
            | Family::Autoregressive { support_size: Some(0), .. } => {
                Err(Error::invalid("support_size", "must be positive"))
            }
            Family::Factor { k: 0, .. } => Err(Error::invalid("k", "need at least one factor")),
            Family::Group { delta2 } if !(delta2 > 0.0 && delta2.is_finite()) => {
                Err(Error::invalid("delta2", format!("must be positive, got {delta2}")))
            }
            _ => Ok(()),
        }
    }

    /// Population covariance of columns `i` and `j`.
    ///
    /// Returns `None` for [`Family::Factor`], whose covariance depends on the
    /// realized loadings (see [`factor_covariance`]).
    pub fn covariance(&self, i: usize, j: usize) -> Option<f64> {
        let same = |a: bool| if a { 1.0 } else { 0.0 };
        Some(match *self {
            Family::Independent => same(i == j),
            Family::CompoundSymmetry { rho, .. } | Family::MarginalNull { rho } => {
                if i == j {
                    1.0
                } else {
                    rho
                }
            }
            Family::Autoregressive { rho, .. } => rho.powi(i.abs_diff(j) as i32),
            Family::Factor { .. } => return None,
            Family::Group { delta2 } => {
                if i < GROUP_WIDTH && j < GROUP_WIDTH {
                    same(i % 3 == j % 3) + same(i == j) * delta2
                } else {
                    same(i == j)
                }
            }
            Family::Extreme => extreme_covariance(i, j),
        })
    }
}

/// Noise variance of the near-duplicates in [`Family::Extreme`].
const EXTREME_DUP_VAR: f64 = 0.01;

fn extreme_covariance(i: usize, j: usize) -> f64 {
    // Columns 0..15 are x_{c % 5} plus independent noise for c >= 5;
    // columns 15.. are (z + w_0 + ... + w_4)/2.
    let base = |c: usize| (c < GROUP_WIDTH).then_some(c % 5);
    match (base(i), base(j)) {
        (Some(a), Some(b)) => {
            if i == j {
                if i < 5 {
                    1.0
                } else {
                    1.0 + EXTREME_DUP_VAR
                }
            } else if a == b {
                1.0
            } else {
                0.0
            }
        }
        (Some(_), None) | (None, Some(_)) => 0.5 * std::f64::consts::FRAC_1_SQRT_2,
        (None, None) => {
            if i == j {
                1.5
            } else {
                1.25
            }
        }
    }
}

/// `cov(x_i, x_j) = Λ_i·Λ_j + [i = j]` for loadings stored one row per column.
pub fn factor_covariance(loadings: &DataMatrix, i: usize, j: usize) -> f64 {
    dot(loadings.row(i), loadings.row(j)) + if i == j { 1.0 } else { 0.0 }
}

/// A Monte-Carlo scenario: design family, dimensions, target R² and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub design: Family,
    pub n: usize,
    pub p: usize,
    pub r_squared: f64,
    pub seed: u64,
}

impl SimScenario {
    pub fn validate(&self) -> Result<()> {
        self.design.validate()?;
        if self.n < 2 {
            return Err(Error::invalid("n", format!("need at least 2 observations, got {}", self.n)));
        }
        if self.p <= self.n {
            return Err(Error::invalid("p", format!("need p > n, got p = {} and n = {}", self.p, self.n)));
        }
        let need = self.design.min_predictors();
        if self.p < need {
            return Err(Error::invalid("p", format!("{} needs p >= {need}", self.design.label())));
        }
        if !(self.r_squared > 0.0 && self.r_squared < 1.0) {
            return Err(Error::invalid("r_squared", format!("must lie in (0, 1), got {}", self.r_squared)));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!("{} n={} p={} R2={}", self.design.label(), self.n, self.p, self.r_squared)
    }
}

/// One simulated data set. `support` is sorted and `beta` is aligned with it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDataset {
    pub x: DataMatrix,
    pub y: Vec<f64>,
    pub support: Vec<usize>,
    pub beta: Vec<f64>,
    pub sigma2: f64,
    pub signal_variance: f64,
}

impl SimDataset {
    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn dense_beta(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.p()];
        for (&j, &b) in self.support.iter().zip(&self.beta) {
            out[j] = b;
        }
        out
    }
}

/// Generator for replicate `replicate` of a scenario.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Coefficients and their (sorted) support.
pub fn make_beta(family: &Family, n: usize, p: usize, rng: &mut impl Rng) -> (Vec<f64>, Vec<usize>) {
    let s = family.sparsity();
    let (beta, support): (Vec<f64>, Vec<usize>) = match *family {
        Family::Independent => {
            let floor = 4.0 * (n as f64).ln() / (n as f64).sqrt();
            let beta = (0..s)
                .map(|_| {
                    let negative = rng.random_bool(0.4);
                    let magnitude = normal(rng).abs() + floor;
                    if negative {
                        -magnitude
                    } else {
                        magnitude
                    }
                })
                .collect();
            (beta, (0..s).collect())
        }
        Family::Autoregressive { .. } => {
            const PATTERN: [f64; 3] = [3.0, 1.5, 2.0];
            ((0..s).map(|k| PATTERN[k % 3]).collect(), (0..s).map(|k| 3 * k).collect())
        }
        Family::Group { .. } => (vec![3.0; s], (0..s).collect()),
        Family::MarginalNull { rho } => (vec![5.0, 5.0, 5.0, 5.0, -20.0 * rho], (0..s).collect()),
        Family::CompoundSymmetry { .. } | Family::Factor { .. } | Family::Extreme => {
            (vec![5.0; s], (0..s).collect())
        }
    };
    debug_assert!(support.last().is_none_or(|&j| j < p));
    (beta, support)
}

/// `βᵀΣβ` for a sparse β. Factor designs need the realized loadings.
pub fn signal_variance(
    family: &Family,
    support: &[usize],
    beta: &[f64],
    loadings: Option<&DataMatrix>,
) -> Result<f64> {
    let cov = |i: usize, j: usize| -> Result<f64> {
        match (family.covariance(i, j), loadings) {
            (Some(c), _) => Ok(c),
            (None, Some(l)) => Ok(factor_covariance(l, i, j)),
            (None, None) => Err(Error::invalid("loadings", "factor designs need their loadings")),
        }
    };
    let mut total = 0.0;
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            total += beta[a] * beta[b] * cov(i, j)?;
        }
    }
    Ok(total)
}

/// Noise variance giving a theoretical R² of `r_squared`.
pub fn calibrate_noise(signal_var: f64, r_squared: f64) -> Result<f64> {
    if !(signal_var > 0.0 && signal_var.is_finite()) {
        return Err(Error::invalid("signal_var", format!("must be positive, got {signal_var}")));
    }
    if !(r_squared > 0.0 && r_squared < 1.0) {
        return Err(Error::invalid("r_squared", format!("must lie in (0, 1), got {r_squared}")));
    }
    Ok(signal_var * (1.0 - r_squared) / r_squared)
}

/// Factor loadings, one row of `k` per predictor.
pub fn draw_loadings(p: usize, k: usize, rng: &mut impl Rng) -> DataMatrix {
    DataMatrix::from_fn(p, k, |_, _| normal(rng))
}

/// Draws an `n × p` design. `loadings` is required for factor designs.
pub fn draw_design(family: &Family, n: usize, p: usize, loadings: Option<&DataMatrix>, rng: &mut impl Rng) -> DataMatrix {
    let mut x = DataMatrix::zeros(n, p);
    for i in 0..n {
        fill_row(family, x.row_mut(i), loadings, rng);
    }
    x
}

fn fill_row(family: &Family, row: &mut [f64], loadings: Option<&DataMatrix>, rng: &mut impl Rng) {
    match *family {
        Family::Independent => row.iter_mut().for_each(|v| *v = normal(rng)),
        Family::CompoundSymmetry { rho, .. } | Family::MarginalNull { rho } => {
            let shared = rho.sqrt() * normal(rng);
            let own = (1.0 - rho).sqrt();
            row.iter_mut().for_each(|v| *v = shared + own * normal(rng));
        }
        Family::Autoregressive { rho, .. } => {
            let innovation = (1.0 - rho * rho).sqrt();
            let mut prev = normal(rng);
            row[0] = prev;
            for v in row.iter_mut().skip(1) {
                prev = rho * prev + innovation * normal(rng);
                *v = prev;
            }
        }
        Family::Factor { k, .. } => {
            let lam = loadings.expect("factor design needs loadings");
            let f: Vec<f64> = (0..k).map(|_| normal(rng)).collect();
            for (j, v) in row.iter_mut().enumerate() {
                *v = dot(&f, lam.row(j)) + normal(rng);
            }
        }
        Family::Group { delta2 } => {
            let z = [normal(rng), normal(rng), normal(rng)];
            let delta = delta2.sqrt();
            for (c, v) in row.iter_mut().enumerate() {
                *v = if c < GROUP_WIDTH {
                    z[c % 3] + delta * normal(rng)
                } else {
                    normal(rng)
                };
            }
        }
        Family::Extreme => {
            let w: [f64; 5] = std::array::from_fn(|_| normal(rng));
            let wsum: f64 = w.iter().sum();
            let dup_sd = EXTREME_DUP_VAR.sqrt();
            for c in 0..row.len() {
                row[c] = match c {
                    0..5 => (normal(rng) + w[c]) * std::f64::consts::FRAC_1_SQRT_2,
                    5..GROUP_WIDTH => row[c % 5] + dup_sd * normal(rng),
                    _ => 0.5 * (normal(rng) + wsum),
                };
            }
        }
    }
}

/// Replicate 0 of the scenario.
pub fn simulate_dataset(scenario: &SimScenario) -> Result<SimDataset> {
    simulate_replicate(scenario, 0)
}

/// Replicate `replicate` of the scenario, drawn from its own stream.
///
/// Draw order within the stream: β, loadings (unless frozen), X row by
/// row, then ε.
pub fn simulate_replicate(scenario: &SimScenario, replicate: u64) -> Result<SimDataset> {
    scenario.validate()?;
    let SimScenario { design, n, p, r_squared, seed } = *scenario;
    if replicate == LOADINGS_STREAM {
        return Err(Error::invalid("replicate", "stream u64::MAX is reserved"));
    }
    let mut rng = replicate_rng(seed, replicate);
    let (beta, support) = make_beta(&design, n, p, &mut rng);
    let loadings = match design {
        Family::Factor { k, freeze_loadings: true } => Some(draw_loadings(p, k, &mut replicate_rng(seed, LOADINGS_STREAM))),
        Family::Factor { k, freeze_loadings: false } => Some(draw_loadings(p, k, &mut rng)),
        _ => None,
    };
    let x = draw_design(&design, n, p, loadings.as_ref(), &mut rng);
    let signal = signal_variance(&design, &support, &beta, loadings.as_ref())?;
    let sigma2 = calibrate_noise(signal, r_squared)?;
    let sigma = sigma2.sqrt();
    let y = (0..n)
        .map(|i| {
            let row = x.row(i);
            let mean: f64 = support.iter().zip(&beta).map(|(&j, &b)| b * row[j]).sum();
            mean + sigma * normal(&mut rng)
        })
        .collect();
    Ok(SimDataset {
        x,
        y,
        support,
        beta,
        sigma2,
        signal_variance: signal,
    })
}
