//! Prediction-set constructions: full conformal, shortcut (grid, affine,
//! kNN and the unimodal Algorithms 1–3), n-fold cross-conformal, the
//! symmetrized Jackknife/Jackknife+, and the deterministic §7 diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::interval::{union_from_flags, GridSpec, IntervalUnion};
use crate::model::ExtendedReal;
use crate::parallel::map_indexed;

pub mod cross;
pub mod diagnostics;
pub mod full;
pub mod jackknife;
pub mod shortcut;
pub mod unimodal;

pub use cross::{cross_conformal_contains, cross_conformal_set, CrossConformal};
pub use diagnostics::{check_gauge_hat_bound, check_sandwich, gauge_hat_bound, sandwich_report, GaugeHatBound, SandwichReport};
pub use full::{augmented_ecdf, full_conformal_contains, full_conformal_set};
pub use jackknife::{jackknife_plus_symmetric, jackknife_symmetric};
pub use shortcut::{
    shortcut_affine, shortcut_closed_form, shortcut_contains, shortcut_knn, shortcut_quantile, shortcut_set,
};
pub use unimodal::{
    bisection, golden_minimizer, refit_bound, shortcut_unimodal, BisectionResult, MinimizerResult,
    UnimodalRunReport,
};

/// Nominal miscoverage, inflation and the grid used by grid-based methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalConfig {
    pub alpha: f64,
    pub delta: f64,
    pub grid: GridSpec,
}

impl ConformalConfig {
    pub fn new(alpha: f64, delta: f64, grid: GridSpec) -> Self {
        Self { alpha, delta, grid }
    }
}

/// Acceptance threshold `q + δ` with infinities absorbing the shift.
pub fn threshold(q: ExtendedReal, delta: f64) -> ExtendedReal {
    q.shifted(delta)
}

/// Grid realization of a fallible membership predicate, evaluated in
/// parallel; the result does not depend on the worker count.
pub fn grid_set<P>(grid: &GridSpec, pred: P) -> Result<IntervalUnion>
where
    P: Fn(f64) -> Result<bool> + Sync + Send,
{
    grid.validate()?;
    let flags = map_indexed(grid.len(), |i| pred(grid.point(i)))?;
    union_from_flags(grid, &flags)
}

/// Grid membership flags of a predicate (used by grid-pointwise checks).
pub fn grid_flags<P>(grid: &GridSpec, pred: P) -> Result<Vec<bool>>
where
    P: Fn(f64) -> Result<bool> + Sync + Send,
{
    grid.validate()?;
    map_indexed(grid.len(), |i| pred(grid.point(i)))
}
