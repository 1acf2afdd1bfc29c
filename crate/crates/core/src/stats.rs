//! Small statistical helpers for the experiment harness: exact binomial
//! confidence intervals, empirical quantiles, and a log-log slope fit.

use statrs::distribution::{Beta, ContinuousCDF};

/// Exact (Clopper-Pearson) two-sided confidence interval for a binomial
/// proportion, via the beta-quantile form. Exceedance events in coverage
/// experiments are rare by design, which is exactly where the normal
/// approximation falls apart.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials >= 1, "need at least one trial");
    assert!(successes <= trials);
    assert!((0.0..1.0).contains(&(1.0 - confidence)) && confidence > 0.0);
    let alpha = 1.0 - confidence;
    let k = successes as f64;
    let n = trials as f64;
    let lower = if successes == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0)
            .expect("valid beta shape")
            .inverse_cdf(alpha / 2.0)
    };
    let upper = if successes == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k)
            .expect("valid beta shape")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    (lower, upper)
}

/// Nearest-rank empirical quantile: the ceil(q·n)-th order statistic,
/// q ∈ (0, 1].
pub fn quantile_nearest_rank(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    assert!(q > 0.0 && q <= 1.0);
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let rank = ((q * sorted.len() as f64).ceil() as usize).max(1);
    sorted[rank - 1]
}

/// Sample mean and standard deviation (n−1 denominator).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Least-squares slope of ln(y) against ln(x); the fitted exponent of a
/// power law.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clopper_pearson_zero_successes_closed_form() {
        // With k = 0 the upper bound is 1 - (alpha/2)^(1/n) exactly.
        let n = 250u64;
        let (lo, hi) = clopper_pearson(0, n, 0.95);
        assert_eq!(lo, 0.0);
        let expected = 1.0 - 0.025f64.powf(1.0 / n as f64);
        assert!((hi - expected).abs() < 1e-9, "hi = {hi}, expected {expected}");
    }

    #[test]
    fn clopper_pearson_all_successes_closed_form() {
        let n = 40u64;
        let (lo, hi) = clopper_pearson(n, n, 0.95);
        assert_eq!(hi, 1.0);
        let expected = 0.025f64.powf(1.0 / n as f64);
        assert!((lo - expected).abs() < 1e-9);
    }

    #[test]
    fn clopper_pearson_interval_contains_point_estimate() {
        let (lo, hi) = clopper_pearson(7, 100, 0.95);
        assert!(lo < 0.07 && 0.07 < hi);
        assert!(lo > 0.0 && hi < 1.0);
    }

    #[test]
    fn interval_shrinks_with_more_trials() {
        let (lo1, hi1) = clopper_pearson(5, 100, 0.95);
        let (lo2, hi2) = clopper_pearson(50, 1000, 0.95);
        assert!(hi2 - lo2 < hi1 - lo1);
    }

    #[test]
    fn quantile_small_cases() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile_nearest_rank(&v, 0.25), 1.0);
        assert_eq!(quantile_nearest_rank(&v, 0.5), 2.0);
        assert_eq!(quantile_nearest_rank(&v, 0.75), 3.0);
        assert_eq!(quantile_nearest_rank(&v, 1.0), 4.0);
        assert_eq!(quantile_nearest_rank(&v, 0.9), 4.0);
    }

    #[test]
    fn slope_recovers_exact_power_law() {
        let xs = [10.0f64, 100.0, 1000.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-0.5)).collect();
        let slope = log_log_slope(&xs, &ys);
        assert!((slope + 0.5).abs() < 1e-12);
    }
}
