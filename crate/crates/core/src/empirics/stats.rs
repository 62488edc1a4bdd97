//! Order statistics, least squares and bootstrap helpers.

use crate::error::{Error, Result};

/// Conservative empirical `(1 − δ)`-quantile: the upper order statistic of
/// rank `⌈(1 − δ) R⌉` among `R` values.
pub fn upper_quantile(values: &[f64], delta: f64) -> Result<f64> {
    let mut v = values.to_vec();
    upper_quantile_in_place(&mut v, delta)
}

pub(crate) fn upper_quantile_in_place(values: &mut [f64], delta: f64) -> Result<f64> {
    let k = quantile_rank(values.len(), delta)?;
    let (_, kth, _) = values.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
    Ok(*kth)
}

/// 1-based rank of the upper order statistic.
pub fn quantile_rank(reps: usize, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    if reps == 0 {
        return Err(Error::param("reps", "must be at least 1"));
    }
    // The small offset keeps products like 0.95 * 2000 from rounding up a rank.
    let k = ((1.0 - delta) * reps as f64 - 1e-9).ceil() as usize;
    Ok(k.clamp(1, reps))
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::param("points", "need at least two paired values"));
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::param("points", "abscissae must not all coincide"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Percentile interval of `samples` at level `1 − alpha`.
pub fn percentile_interval(samples: &mut [f64], alpha: f64) -> (f64, f64) {
    samples.sort_unstable_by(|a, b| a.total_cmp(b));
    let n = samples.len();
    let lo = ((alpha / 2.0) * n as f64).floor() as usize;
    let hi = (((1.0 - alpha / 2.0) * n as f64).ceil() as usize).clamp(1, n) - 1;
    (samples[lo.min(n - 1)], samples[hi])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_is_upper_order_statistic() {
        assert_eq!(quantile_rank(2000, 0.05).unwrap(), 1900);
        assert_eq!(quantile_rank(100_000, 0.05).unwrap(), 95_000);
        assert_eq!(quantile_rank(10, 0.05).unwrap(), 10);
        assert_eq!(quantile_rank(3, 0.5).unwrap(), 2);
        assert!(quantile_rank(10, 1.5).is_err());
    }

    #[test]
    fn quantile_of_range() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(upper_quantile(&v, 0.05).unwrap(), 95.0);
        assert_eq!(upper_quantile(&v, 0.01).unwrap(), 99.0);
    }

    #[test]
    fn ols_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let (s, i) = ols(&x, &y).unwrap();
        assert!((s + 0.5).abs() < 1e-15 && (i - 2.0).abs() < 1e-15);
        assert!(ols(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }
}
