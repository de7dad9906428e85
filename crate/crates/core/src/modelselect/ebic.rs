use crate::error::{Error, Result};

/// Extended BIC, `log(RSS / n) + (d / n) (log n + 2 log p)`.
pub fn ebic(rss: f64, n: usize, p: usize, d: usize) -> Result<f64> {
    if !(rss > 0.0) || !rss.is_finite() {
        return Err(Error::NonPositiveRss { rss });
    }
    if n == 0 || p == 0 {
        return Err(Error::invalid("n, p", "must be at least 1"));
    }
    let nf = n as f64;
    Ok((rss / nf).ln() + d as f64 / nf * (nf.ln() + 2.0 * (p as f64).ln()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_penalty_for_empty_model() {
        assert_eq!(ebic(50.0, 100, 1000, 0).unwrap(), (0.5f64).ln());
    }

    #[test]
    fn penalty_only_value() {
        // 5/100 * (ln 100 + 2 ln 1000)
        let v = ebic(100.0, 100, 1000, 5).unwrap();
        assert!((v - 0.921_034_037_197_618_4).abs() < 1e-12, "{v}");
    }

    #[test]
    fn increasing_in_model_size() {
        let vals: Vec<f64> = (0..10).map(|d| ebic(3.0, 50, 200, d).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_rss_is_an_error() {
        assert!(matches!(ebic(0.0, 10, 10, 1), Err(Error::NonPositiveRss { .. })));
        assert!(ebic(f64::NAN, 10, 10, 1).is_err());
    }
}
