//! Shortcut prediction sets: the grid version of Def. 4.1 and the exact
//! closed forms for affine predictors (§4.1.1) and kNN (§4.1.2).

use crate::ecdf::build_ecdf;
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalUnion};
use crate::model::{DataSet, ExtendedReal};
use crate::predictors::{affine_coefficients, AffineCoefficients, Predictor, PredictorKind};
use crate::scores::{ConformityScore, ScoreKind};

use super::{grid_set, threshold, ConformalConfig};

/// `Q_{1−α}(Ĝ)` where `Ĝ` is the ECDF of the leave-one-out scores.
pub fn shortcut_quantile(c: &ConformityScore, data: &DataSet, alpha: f64) -> Result<ExtendedReal> {
    Ok(build_ecdf(&c.loo_scores(data)?)?.quantile(1.0 - alpha))
}

/// Exact membership `C((y, x), T) ≤ q + δ` for a precomputed `q`.
pub fn shortcut_contains(c: &ConformityScore, data: &DataSet, x_new: &[f64], y: f64, q: ExtendedReal, delta: f64) -> Result<bool> {
    Ok(threshold(q, delta).admits(c.score(y, x_new, data)?))
}

/// Grid realization of the δ-distorted shortcut set; `n + |grid|` score
/// evaluations (one fit in total for out-of-sample scores).
pub fn shortcut_set(c: &ConformityScore, data: &DataSet, x_new: &[f64], cfg: &ConformalConfig) -> Result<IntervalUnion> {
    let bound = threshold(shortcut_quantile(c, data, cfg.alpha)?, cfg.delta);
    let scorer = c.candidate_scorer(x_new, data)?;
    grid_set(&cfg.grid, |y| Ok(bound.admits(scorer.eval(y)?)))
}

/// `{y : |y·a − b| ≤ q + δ}` in closed form.
pub fn shortcut_affine(coeffs: AffineCoefficients, q: ExtendedReal, delta: f64) -> IntervalUnion {
    let r = threshold(q, delta).value();
    let AffineCoefficients { a, b } = coeffs;
    if r < 0.0 {
        return IntervalUnion::empty();
    }
    if a == 0.0 {
        return if b.abs() <= r {
            IntervalUnion::real_line()
        } else {
            IntervalUnion::empty()
        };
    }
    if r == f64::INFINITY {
        return IntervalUnion::real_line();
    }
    let (lo, hi) = ((b - r) / a, (b + r) / a);
    IntervalUnion::single(Interval::closed(lo.min(hi), lo.max(hi)))
}

/// Exact shortcut set for scores with a closed form: out-of-sample scores of
/// any predictor (`a = 1`, `b = A(x, T)`), in-sample scores of affine
/// predictors, and in-sample kNN.
pub fn shortcut_closed_form(c: &ConformityScore, data: &DataSet, x_new: &[f64], alpha: f64, delta: f64) -> Result<IntervalUnion> {
    let coeffs = match c.kind() {
        ScoreKind::OutSample(p) => AffineCoefficients {
            a: 1.0,
            b: p.predict(x_new, data)?,
        },
        ScoreKind::InSample(p) => match p.kind() {
            PredictorKind::Knn { k } => return shortcut_knn(*k, data, x_new, alpha, delta),
            _ => affine_coefficients(p, x_new, data)?,
        },
        ScoreKind::Custom { .. } => {
            return Err(Error::Unsupported("custom scores have no closed-form shortcut".into()));
        }
    };
    Ok(shortcut_affine(coeffs, shortcut_quantile(c, data, alpha)?, delta))
}

fn bitwise_equal(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(u, v)| u.to_bits() == v.to_bits())
}

/// Exact shortcut set of `in_sample(kNN_k)`: center the `(k−1)`-NN prediction,
/// half-width `k/(k−1)·(Q_{1−α}(Ĝ) + δ)`.
pub fn shortcut_knn(k: usize, data: &DataSet, x_new: &[f64], alpha: f64, delta: f64) -> Result<IntervalUnion> {
    if k < 2 || k > data.len() {
        return Err(Error::Argument(format!("shortcut_knn needs 2 <= k <= n, got k = {k}, n = {}", data.len())));
    }
    for i in 0..data.len() {
        let duplicate = bitwise_equal(data.features(i), x_new)
            || (i + 1..data.len()).any(|j| bitwise_equal(data.features(i), data.features(j)));
        if duplicate {
            return Err(Error::Precondition(
                "kNN closed form needs unique features; apply augment_unique_id first".into(),
            ));
        }
    }
    let c = ConformityScore::in_sample(Predictor::knn(k)?);
    let r = threshold(shortcut_quantile(&c, data, alpha)?, delta).value();
    if r < 0.0 {
        return Ok(IntervalUnion::empty());
    }
    if r == f64::INFINITY {
        return Ok(IntervalUnion::real_line());
    }
    let center = Predictor::knn(k - 1)?.predict(x_new, data)?;
    let half = k as f64 / (k as f64 - 1.0) * r;
    Ok(IntervalUnion::single(Interval::closed(center - half, center + half)))
}
