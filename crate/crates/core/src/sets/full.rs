//! Full conformal prediction sets.

use crate::ecdf::{build_ecdf, StepFunction};
use crate::error::Result;
use crate::interval::IntervalUnion;
use crate::model::DataSet;
use crate::scores::ConformityScore;

use super::{grid_set, threshold, ConformalConfig};

/// `F̂_y`: ECDF of the candidate's score and the `n` scores `C(t_i, D^y \ t_i)`.
pub fn augmented_ecdf(c: &ConformityScore, data: &DataSet, x_new: &[f64], y: f64) -> Result<StepFunction> {
    build_ecdf(&c.augmented_scores(data, x_new, y)?.all())
}

/// Exact membership `C((y, x), T) ≤ Q_{1−α}(F̂_y) + δ`.
pub fn full_conformal_contains(
    c: &ConformityScore,
    data: &DataSet,
    x_new: &[f64],
    y: f64,
    alpha: f64,
    delta: f64,
) -> Result<bool> {
    let scores = c.augmented_scores(data, x_new, y)?;
    let f = build_ecdf(&scores.all())?;
    Ok(threshold(f.quantile(1.0 - alpha), delta).admits(scores.candidate))
}

/// Grid realization of the δ-distorted full conformal set.
pub fn full_conformal_set(c: &ConformityScore, data: &DataSet, x_new: &[f64], cfg: &ConformalConfig) -> Result<IntervalUnion> {
    grid_set(&cfg.grid, |y| full_conformal_contains(c, data, x_new, y, cfg.alpha, cfg.delta))
}
