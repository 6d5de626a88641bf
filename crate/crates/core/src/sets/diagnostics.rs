//! The deterministic inequalities of §7: the gauge bound between `F̂_y` and
//! `Ĝ`, and the cross-conformal/shortcut sandwich.

use serde::{Deserialize, Serialize};

use crate::ecdf::build_ecdf;
use crate::error::{Error, Result};
use crate::interval::GridSpec;
use crate::levy::{levy_gauge, ROUNDING_SLACK};
use crate::model::DataSet;
use crate::scores::ConformityScore;

use super::cross::CrossConformal;
use super::threshold;
use crate::parallel::map_indexed;

/// Both sides of the §7.2 lemma at candidate `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeHatBound {
    pub gauge: f64,
    pub bound: f64,
}

/// `ld_δ(F̂_y, Ĝ)` and `(1 + #{i : |C(t_i, D^y\t_i) − C(t_i, T\i)| > δ})/(n+1)`.
pub fn gauge_hat_bound(c: &ConformityScore, data: &DataSet, x_new: &[f64], y: f64, delta: f64) -> Result<GaugeHatBound> {
    let n = data.len();
    if n < 2 {
        return Err(Error::Argument("the gauge bound needs n >= 2".into()));
    }
    let augmented = c.augmented_scores(data, x_new, y)?;
    let reference = c.loo_scores(data)?;
    let f_hat = build_ecdf(&augmented.all())?;
    let g_hat = build_ecdf(&reference)?;
    let gauge = levy_gauge(&f_hat, &g_hat, delta)?.epsilon;
    let moved = augmented
        .others
        .iter()
        .zip(&reference)
        .filter(|(a, r)| (*a - *r).abs() > delta)
        .count();
    Ok(GaugeHatBound {
        gauge,
        bound: (1 + moved) as f64 / (n + 1) as f64,
    })
}

/// Lemma §7.2 at candidate `y` (with the documented 1e-12 rounding slack).
pub fn check_gauge_hat_bound(c: &ConformityScore, data: &DataSet, x_new: &[f64], y: f64, delta: f64) -> Result<bool> {
    let r = gauge_hat_bound(c, data, x_new, y, delta)?;
    Ok(r.gauge <= r.bound + ROUNDING_SLACK)
}

/// Grid-level outcome of the §7.3 sandwich check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub grid_points: usize,
    /// Points of `Δ_n(ε, δ₂)`.
    pub delta_points: usize,
    /// Points in `PS^cc_{α+ε}(δ₁)` outside `PS^sc_α(δ₁+δ₂) ∪ Δ_n`.
    pub cc_violations: usize,
    /// Points in `PS^sc_{α+ε}(δ₁)` outside `PS^cc_α(δ₁+δ₂) ∪ Δ_n`.
    pub sc_violations: usize,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.cc_violations == 0 && self.sc_violations == 0
    }
}

/// Evaluates both sandwich inclusions at every grid point.
#[allow(clippy::too_many_arguments)]
pub fn sandwich_report(
    c: &ConformityScore,
    data: &DataSet,
    x_new: &[f64],
    alpha: f64,
    eps: f64,
    delta1: f64,
    delta2: f64,
    grid: &GridSpec,
) -> Result<SandwichReport> {
    if !(eps > 0.0 && delta2 > 0.0) {
        return Err(Error::Argument("the sandwich needs eps > 0 and delta2 > 0".into()));
    }
    let n = data.len();
    let cc = CrossConformal::new(c, data, x_new)?;
    let g_hat = build_ecdf(cc.reference_scores())?;
    let sc_wide = threshold(g_hat.quantile(1.0 - alpha), delta1 + delta2);
    let sc_narrow = threshold(g_hat.quantile(1.0 - (alpha + eps)), delta1);
    let scorer = c.candidate_scorer(x_new, data)?;
    // per point: (in Δ, cc violation, sc violation)
    grid.validate()?;
    let outcomes = map_indexed(grid.len(), |i| {
        let y = grid.point(i);
        let full = scorer.eval(y)?;
        let loo = cc.candidate_scores(y)?;
        let moved = loo.iter().filter(|&&s| (full - s).abs() >= delta2).count();
        let in_delta = moved as f64 > n as f64 * eps - 1.0;
        let cc_narrow = cc.accepts(&loo, alpha + eps, delta1);
        let cc_wide = cc.accepts(&loo, alpha, delta1 + delta2);
        let cc_violation = cc_narrow && !(sc_wide.admits(full) || in_delta);
        let sc_violation = sc_narrow.admits(full) && !(cc_wide || in_delta);
        Ok((in_delta, cc_violation, sc_violation))
    })?;
    Ok(SandwichReport {
        grid_points: outcomes.len(),
        delta_points: outcomes.iter().filter(|o| o.0).count(),
        cc_violations: outcomes.iter().filter(|o| o.1).count(),
        sc_violations: outcomes.iter().filter(|o| o.2).count(),
    })
}

/// Lemma §7.3: both inclusions hold at every grid point.
#[allow(clippy::too_many_arguments)]
pub fn check_sandwich(
    c: &ConformityScore,
    data: &DataSet,
    x_new: &[f64],
    alpha: f64,
    eps: f64,
    delta1: f64,
    delta2: f64,
    grid: &GridSpec,
) -> Result<bool> {
    Ok(sandwich_report(c, data, x_new, alpha, eps, delta1, delta2, grid)?.holds())
}
