//! Symmetrized Jackknife and Jackknife+ intervals.

use crate::ecdf::build_ecdf;
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalUnion};
use crate::model::DataSet;
use crate::predictors::Predictor;
use crate::scores::ConformityScore;

use super::threshold;

/// `A(x, T) ± (Q_{1−α}(ECDF of |LOO residuals|) + δ)`. The residuals are the
/// leave-one-out scores of `out_sample(P)`, so the endpoints coincide bit for
/// bit with the closed-form shortcut of that score.
pub fn jackknife_symmetric(p: &Predictor, data: &DataSet, x_new: &[f64], alpha: f64, delta: f64) -> Result<IntervalUnion> {
    if data.len() < 2 {
        return Err(Error::Argument("the Jackknife needs n >= 2".into()));
    }
    let residuals = ConformityScore::out_sample(p.clone()).loo_scores(data)?;
    let r = threshold(build_ecdf(&residuals)?.quantile(1.0 - alpha), delta).value();
    if r < 0.0 {
        return Ok(IntervalUnion::empty());
    }
    if r == f64::INFINITY {
        return Ok(IntervalUnion::real_line());
    }
    let center = p.predict(x_new, data)?;
    Ok(IntervalUnion::single(Interval::closed(center - r, center + r)))
}

/// `j`-th smallest (1-based) with `-∞` for `j < 1` and `+∞` for `j > len`.
fn order_statistic(sorted: &[f64], j: i64) -> f64 {
    if j < 1 {
        f64::NEG_INFINITY
    } else if j as usize > sorted.len() {
        f64::INFINITY
    } else {
        sorted[j as usize - 1]
    }
}

/// Symmetric Jackknife+: lower endpoint the `⌊α(n+1)⌋`-th smallest of
/// `A(x, T\i) − R_i`, upper the `⌈(1−α)(n+1)⌉`-th smallest of
/// `A(x, T\i) + R_i`, then widened by `δ` on both sides.
pub fn jackknife_plus_symmetric(p: &Predictor, data: &DataSet, x_new: &[f64], alpha: f64, delta: f64) -> Result<IntervalUnion> {
    let n = data.len();
    if n < 2 {
        return Err(Error::Argument("the Jackknife+ needs n >= 2".into()));
    }
    let residuals = ConformityScore::out_sample(p.clone()).loo_scores(data)?;
    let centers = (0..n)
        .map(|i| p.predict(x_new, &data.without(i)))
        .collect::<Result<Vec<f64>>>()?;
    let mut lows: Vec<f64> = centers.iter().zip(&residuals).map(|(c, r)| c - r).collect();
    let mut highs: Vec<f64> = centers.iter().zip(&residuals).map(|(c, r)| c + r).collect();
    lows.sort_by(f64::total_cmp);
    highs.sort_by(f64::total_cmp);
    let m = (n + 1) as f64;
    let lower = order_statistic(&lows, (alpha * m).floor() as i64) - delta;
    let upper = order_statistic(&highs, ((1.0 - alpha) * m).ceil() as i64) + delta;
    if !(lower <= upper) {
        return Ok(IntervalUnion::empty());
    }
    Ok(IntervalUnion::single(Interval::closed(lower, upper)))
}
