//! Small summary statistics shared by the Monte Carlo estimators.

use serde::{Deserialize, Serialize};

use crate::numeric::exact_sum;

/// Mean, Monte Carlo standard error and upper quantile of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub count: usize,
    pub mean: f64,
    pub se: f64,
    pub q95: f64,
}

/// Arithmetic mean (0 for an empty sample).
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        exact_sum(values.iter().copied()) / values.len() as f64
    }
}

/// Standard error of the mean, `sd / sqrt(m)` with the unbiased variance.
pub fn std_error(values: &[f64]) -> f64 {
    let m = values.len();
    if m < 2 {
        return 0.0;
    }
    let mu = mean(values);
    let ss = exact_sum(values.iter().map(|v| (v - mu) * (v - mu)));
    (ss / (m - 1) as f64 / m as f64).sqrt()
}

/// Binomial standard error `sqrt(p(1-p)/m)`.
pub fn binomial_se(p: f64, m: usize) -> f64 {
    if m == 0 {
        0.0
    } else {
        (p * (1.0 - p) / m as f64).sqrt()
    }
}

/// Empirical quantile in the Def. 3.1 convention: the `ceil(level·m)`-th
/// smallest value (the minimum for `level <= 0`, NaN for an empty sample).
pub fn empirical_quantile(values: &[f64], level: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let rank = (level * m as f64).ceil().clamp(1.0, m as f64) as usize;
    sorted[rank - 1]
}

/// Mean, standard error and 95% quantile of `values`.
pub fn summarize(values: &[f64]) -> SampleSummary {
    SampleSummary {
        count: values.len(),
        mean: mean(values),
        se: std_error(values),
        q95: empirical_quantile(values, 0.95),
    }
}

/// Fraction of `values` strictly above `threshold`.
pub fn exceed_fraction(values: &[f64], threshold: f64) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().filter(|&&v| v > threshold).count() as f64 / values.len() as f64
    }
}
