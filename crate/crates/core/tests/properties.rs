//! Randomized invariants of the screeners, selection rules and refits.

use holp_core::metrics::{inclusion_probability, run_replicates};
use holp_core::modelselect::{ebic, lambda_grid, lambda_max, lasso_path};
use holp_core::screeners::{
    holp_scores, rank_select, ridge_holp_scores, rrcs_naive, rrcs_omega, sis_scores, threshold_select,
};
use holp_core::simgen::{Family, SimScenario};
use holp_core::screeners::{ScreenMethod, ScreeningScores};
use holp_core::{mat_mul, svd_small, DataMatrix, PipelineSpec, Refiner, Screener, SubmodelRule, Transpose};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(n: usize, p: usize, rng: &mut ChaCha8Rng) -> DataMatrix {
    DataMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
}

fn vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn close(a: &[f64], b: &[f64], rel: f64) -> bool {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= rel * scale)
}

type ScoreFn = fn(&DataMatrix, &[f64]) -> holp_core::Result<ScreeningScores>;

fn scored(scores: Vec<f64>) -> ScreeningScores {
    ScreeningScores {
        scores,
        method: ScreenMethod::Sis,
        params: Default::default(),
        warnings: Vec::new(),
    }
}

/// Random `n × n` orthogonal matrix (left singular vectors of a Gaussian).
fn orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DataMatrix {
    svd_small(&gaussian(n, n, rng)).unwrap().u
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn holp_is_invariant_to_row_rotation(seed in any::<u64>(), n in 3usize..20, extra in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = n + extra;
        let x = gaussian(n, p, &mut rng);
        let y = vector(n, &mut rng);
        let q = orthogonal(n, &mut rng);
        let qx = mat_mul(&q, &x, Transpose::No, Transpose::No).unwrap();
        let qy = q.mul_vec(&y).unwrap();
        let a = holp_scores(&x, &y).unwrap();
        let b = holp_scores(&qx, &qy).unwrap();
        prop_assert!(close(&a.scores, &b.scores, 1e-8));
    }

    #[test]
    fn column_permutation_permutes_scores(seed in any::<u64>(), n in 4usize..16, extra in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = n + extra;
        let x = gaussian(n, p, &mut rng);
        let y = vector(n, &mut rng);
        let mut perm: Vec<usize> = (0..p).collect();
        perm.reverse();
        perm.rotate_left(seed as usize % p);
        let xp = x.select_columns(&perm);
        let screeners: [ScoreFn; 3] = [holp_scores, sis_scores, holp_core::screeners::rrcs_scores];
        for f in screeners {
            let a = f(&x, &y).unwrap();
            let b = f(&xp, &y).unwrap();
            let permuted: Vec<f64> = perm.iter().map(|&j| a.scores[j]).collect();
            prop_assert!(close(&permuted, &b.scores, 1e-9));
        }
    }

    #[test]
    fn row_permutation_leaves_scores_unchanged(seed in any::<u64>(), n in 4usize..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian(n, 2 * n, &mut rng);
        let y = vector(n, &mut rng);
        let rows: Vec<usize> = (0..n).rev().collect();
        let xr = x.select_rows(&rows);
        let yr: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
        prop_assert!(close(&holp_scores(&x, &y).unwrap().scores, &holp_scores(&xr, &yr).unwrap().scores, 1e-9));
        prop_assert!(close(&sis_scores(&x, &y).unwrap().scores, &sis_scores(&xr, &yr).unwrap().scores, 1e-12));
    }

    #[test]
    fn holp_matches_pseudo_inverse(seed in any::<u64>(), n in 3usize..16, extra in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian(n, n + extra, &mut rng);
        let y = vector(n, &mut rng);
        let beta = svd_small(&x).unwrap().pinv().mul_vec(&y).unwrap();
        let oracle: Vec<f64> = beta.iter().map(|b| b.abs()).collect();
        prop_assert!(close(&holp_scores(&x, &y).unwrap().scores, &oracle, 1e-8));
    }

    #[test]
    fn ridge_holp_matches_primal_form(seed in any::<u64>(), n in 3usize..10, extra in 1usize..20, r in 1e-2f64..20.0) {
        // X^T (X X^T + r I)^{-1} y == (X^T X + r I)^{-1} X^T y
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = n + extra;
        let x = gaussian(n, p, &mut rng);
        let y = vector(n, &mut rng);
        let mut xtx = mat_mul(&x, &x, Transpose::Yes, Transpose::No).unwrap();
        xtx.add_diagonal(r);
        let mut beta = x.tr_mul_vec(&y).unwrap();
        holp_core::spd_factor(&xtx).unwrap().solve_in_place(&mut beta).unwrap();
        let oracle: Vec<f64> = beta.iter().map(|b| b.abs()).collect();
        prop_assert!(close(&ridge_holp_scores(&x, &y, r).unwrap().scores, &oracle, 1e-8));
    }

    #[test]
    fn ridge_holp_approaches_holp(seed in any::<u64>(), n in 3usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian(n, 3 * n, &mut rng);
        let y = vector(n, &mut rng);
        let h = holp_scores(&x, &y).unwrap();
        let r = ridge_holp_scores(&x, &y, 1e-9).unwrap();
        prop_assert!(close(&h.scores, &r.scores, 1e-5));
    }

    #[test]
    fn sis_is_scale_invariant(seed in any::<u64>(), scale in 1e-3f64..1e3, shift in -50.0f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian(12, 30, &mut rng);
        let y = vector(12, &mut rng);
        let xs = DataMatrix::from_fn(12, 30, |i, j| scale * x[(i, j)] + shift);
        prop_assert!(close(&sis_scores(&x, &y).unwrap().scores, &sis_scores(&xs, &y).unwrap().scores, 1e-9));
    }

    #[test]
    fn rrcs_matches_pairwise_count(seed in any::<u64>(), n in 2usize..40, levels in 2u32..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
        prop_assert!((rrcs_omega(&x, &y) - rrcs_naive(&x, &y)).abs() < 1e-12);
    }

    #[test]
    fn top_d_sets_are_nested(seed in any::<u64>(), p in 2usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // coarse values to force ties
        let raw: Vec<f64> = (0..p).map(|_| rng.random_range(0..5) as f64).collect();
        let scores = scored(raw);
        let mut previous: Vec<usize> = Vec::new();
        for d in 1..=p {
            let sel = rank_select(&scores, d).unwrap();
            prop_assert!(sel.indices.starts_with(&previous));
            previous = sel.indices;
        }
        let positive = scores.scores.iter().filter(|&&s| s > 0.0).count();
        prop_assert_eq!(previous.len(), positive);
    }

    #[test]
    fn threshold_agrees_with_ranking(seed in any::<u64>(), p in 2usize..60, gamma in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..3.0)).collect();
        let scores = scored(raw.clone());
        let t = threshold_select(&scores, gamma).unwrap();
        prop_assert_eq!(t.len(), raw.iter().filter(|&&s| s >= gamma).count());
        if !t.is_empty() {
            prop_assert_eq!(rank_select(&scores, t.len()).unwrap().indices, t.indices);
        }
    }

    #[test]
    fn ebic_is_monotone(rss in 1e-6f64..1e6, n in 10usize..1000, p in 1usize..100_000, d in 0usize..50) {
        let p = p.max(n + 1);
        let base = ebic(rss, n, p, d).unwrap();
        prop_assert!(ebic(rss * 1.5, n, p, d).unwrap() > base);
        prop_assert!(ebic(rss, n, p, d + 1).unwrap() > base);
    }
}

#[test]
fn lasso_kkt_conditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let (n, p) = (40, 25);
        let x = gaussian(n, p, &mut rng);
        let noise = vector(n, &mut rng);
        let y: Vec<f64> = (0..n).map(|i| 2.0 * x[(i, 0)] - 1.5 * x[(i, 4)] + 0.5 * noise[i]).collect();
        let grid = lambda_grid(lambda_max(&x, &y), 30, 1e-2);
        let path = lasso_path(&x, &y, &grid).unwrap();
        for fit in &path {
            let resid: Vec<f64> = (0..n).map(|i| y[i] - fit.predict_row(x.row(i))).collect();
            let beta = fit.dense_coefficients(p);
            for j in 0..p {
                let col = x.column(j);
                let m = col.iter().sum::<f64>() / n as f64;
                let s = (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64).sqrt();
                let grad = col.iter().zip(&resid).map(|(c, r)| (c - m) / s * r).sum::<f64>() / n as f64;
                if beta[j] != 0.0 {
                    assert!((grad - fit.lambda * beta[j].signum()).abs() < 1e-5 * fit.lambda.max(1.0));
                } else {
                    assert!(grad.abs() <= fit.lambda * (1.0 + 1e-5));
                }
            }
        }
    }
}

fn small_scenario(seed: u64) -> SimScenario {
    SimScenario {
        design: Family::Autoregressive {
            rho: 0.6,
            support_size: None,
        },
        n: 40,
        p: 150,
        r_squared: 0.7,
        seed,
    }
}

#[test]
fn experiments_do_not_depend_on_thread_count() {
    let spec = PipelineSpec {
        screener: Screener::DivideHolp { partitions: 2 },
        submodel: SubmodelRule::TopD(20),
        refiner: Refiner::LassoEbic,
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut outs = run_replicates(&small_scenario(5), &spec, 12).unwrap();
            outs.iter_mut().for_each(|o| o.metrics.wall_time_s = 0.0);
            outs
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn inclusion_grows_with_d() {
    let sc = small_scenario(9);
    let mut last = 0.0;
    for d in [3, 6, 12, 24, 39] {
        let p = inclusion_probability(&sc, &Screener::Holp, d, 30).unwrap().inclusion_probability;
        assert!(p >= last, "d = {d}: {p} < {last}");
        last = p;
    }
}

#[test]
fn separation_never_exceeds_top_s_inclusion() {
    let sc = small_scenario(10);
    let s = sc.design.sparsity();
    for screener in [Screener::Holp, Screener::Sis, Screener::RidgeHolp { ridge: 10.0 }] {
        let r = inclusion_probability(&sc, &screener, s, 40).unwrap();
        assert!(r.separation_probability.unwrap() <= r.inclusion_probability);
    }
}
