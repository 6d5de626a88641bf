//! Right-continuous step functions, empirical distribution functions and
//! extended quantiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ExtendedReal;

/// Right-continuous nondecreasing step function with values in `[0, 1]`.
///
/// `values[i]` is attained on `[breakpoints[i], breakpoints[i + 1])`; the
/// function is 0 left of the first breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    /// Validates strictly increasing finite breakpoints and nondecreasing
    /// values in `[0, 1]`.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::Argument("breakpoints and values differ in length".into()));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::Argument("breakpoints must be finite".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument("breakpoints must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) || values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Argument("values must be nondecreasing in [0, 1]".into()));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `F(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        if idx == 0 {
            0.0
        } else {
            self.values[idx - 1]
        }
    }

    /// `F(t-)`, the supremum of `F` on `(-inf, t)`.
    pub fn left_limit(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b < t);
        if idx == 0 {
            0.0
        } else {
            self.values[idx - 1]
        }
    }

    /// `inf { x : F(x) >= alpha }` on the extended reals: `-inf` for
    /// `alpha <= 0`, `+inf` when `alpha` exceeds every attained value.
    pub fn quantile(&self, alpha: f64) -> ExtendedReal {
        if alpha.is_nan() {
            return ExtendedReal::INFINITY;
        }
        if alpha <= 0.0 {
            return ExtendedReal::NEG_INFINITY;
        }
        let idx = self.values.partition_point(|&v| v < alpha);
        match self.breakpoints.get(idx) {
            Some(&b) => ExtendedReal::new(b),
            None => ExtendedReal::INFINITY,
        }
    }

    /// `t -> F(t - shift)`, i.e. every breakpoint moved right by `shift`.
    /// Breakpoints that collide under rounding are merged.
    pub fn translated(&self, shift: f64) -> StepFunction {
        let mut breakpoints: Vec<f64> = Vec::with_capacity(self.breakpoints.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.values.len());
        for (&b, &v) in self.breakpoints.iter().zip(&self.values) {
            let nb = b + shift;
            if breakpoints.last() == Some(&nb) {
                *values.last_mut().expect("paired") = v;
            } else {
                breakpoints.push(nb);
                values.push(v);
            }
        }
        StepFunction { breakpoints, values }
    }

    /// `t -> F(c t)` for `c > 0`: breakpoints divided by `c`.
    pub fn rescaled(&self, c: f64) -> Result<StepFunction> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Argument(format!("scale {c} must be positive")));
        }
        let breakpoints: Vec<f64> = self.breakpoints.iter().map(|b| b / c).collect();
        StepFunction::new(breakpoints, self.values.clone())
    }

    /// Value right of the last breakpoint (1 for proper distribution functions).
    pub fn terminal_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Empirical distribution function with mass `1/n` per value; ties stack
/// into a single breakpoint.
pub fn build_ecdf(values: &[f64]) -> Result<StepFunction> {
    if values.is_empty() {
        return Err(Error::Argument("cannot build an ECDF from no values".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("ECDF values must be finite".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut breakpoints = Vec::with_capacity(n);
    let mut levels = Vec::with_capacity(n);
    for (i, &v) in sorted.iter().enumerate() {
        let level = (i + 1) as f64 / n as f64;
        if breakpoints.last() == Some(&v) {
            *levels.last_mut().expect("paired") = level;
        } else {
            breakpoints.push(v);
            levels.push(level);
        }
    }
    Ok(StepFunction {
        breakpoints,
        values: levels,
    })
}

/// Free-function form of [`StepFunction::quantile`].
pub fn quantile(f: &StepFunction, alpha: f64) -> ExtendedReal {
    f.quantile(alpha)
}

/// Free-function form of [`StepFunction::left_limit`].
pub fn left_limit(f: &StepFunction, t: f64) -> f64 {
    f.left_limit(t)
}
