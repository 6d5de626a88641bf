//! conformal-kit: distribution-free prediction sets for regression.
//!
//! Full conformal, shortcut (including the affine, kNN and unimodal fast
//! paths), n-fold cross-conformal and symmetrized Jackknife sets, the Lévy
//! gauge toolkit used to compare score distributions, and a reproducible
//! Monte Carlo harness.

pub mod ecdf;
pub mod error;
pub mod harness;
pub mod interval;
pub mod levy;
pub mod model;
pub mod numeric;
pub mod parallel;
pub mod predictors;
pub mod scores;
pub mod sets;
pub mod stats;

pub use ecdf::{build_ecdf, left_limit, quantile, StepFunction};
pub use error::{Error, Result};
pub use interval::{
    interval_union_from_predicate, symmetric_difference_length, GridSpec, Interval, IntervalUnion,
};
pub use levy::{check_quantile_inequality, gauge_upper_bounds, levy_gauge, levy_metric, GaugeResult};
pub use model::{DataGenerator, DataSet, ExtendedReal, Observation, RngSeed};
pub use predictors::{
    affine_coefficients, augment_unique_id, estimate_oos_instability, make_in_sample_consistent,
    make_out_sample_consistent, AffineCoefficients, Predictor, PredictorKind,
};
pub use scores::{estimate_score_instability, ConformityScore, ScoreInstability, ScoreKind};
pub use sets::*;
