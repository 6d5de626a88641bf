//! Algorithms 1–3 of Appendix B: bisection, the golden-section minimizer and
//! the shortcut algorithm for unimodal conformity scores.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalUnion};
use crate::model::DataSet;
use crate::scores::ConformityScore;

use super::shortcut::shortcut_quantile;
use super::threshold;

/// Output of Algorithm 1: `C(l) ≤ b < C(u)` and `|l − u| ≤ eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectionResult {
    pub l: f64,
    pub u: f64,
    /// Score evaluations inside the loop (one per iteration).
    pub iterations: u64,
}

/// Output of Algorithm 2: the minimizer lies between `m` and `big_m`,
/// `|m − big_m| ≤ eps` and `C(m) ≤ C(big_m)` up to Alg. 2's tie rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizerResult {
    pub m: f64,
    pub big_m: f64,
    pub score_m: f64,
    pub score_big_m: f64,
    /// Total score evaluations (4 initial plus one per iteration).
    pub evaluations: u64,
}

/// Output of Algorithm 3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnimodalRunReport {
    pub interval: IntervalUnion,
    /// Candidate-score evaluations made by Algorithm 3 (the refits the
    /// proposition counts).
    pub refits: u64,
    /// `⌊10 + (K + 1 + log2(1/ε))(2 + 1/log2 φ)⌋`
    pub bound: f64,
    pub epsilon: f64,
    #[serde(rename = "K")]
    pub k: i32,
    /// Leave-one-out fits used once to build `Ĝ` (reported separately).
    pub reference_fits: u64,
}

/// Refit bound of the Appendix B proposition.
pub fn refit_bound(k: i32, eps: f64) -> f64 {
    let phi = (5f64.sqrt() + 1.0) / 2.0;
    (10.0 + (k as f64 + 1.0 + (1.0 / eps).log2()) * (2.0 + 1.0 / phi.log2())).floor()
}

/// Algorithm 1 loop on a score closure, given entry values already known to
/// satisfy the bracketing contract.
fn bisect<F>(score: &mut F, b: f64, lower: f64, upper: f64, eps: f64) -> Result<BisectionResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut l, mut u) = (lower, upper);
    let mut iterations = 0;
    while (l - u).abs() > eps {
        let m = 0.5 * (l + u);
        if score(m)? > b {
            u = m;
        } else {
            l = m;
        }
        iterations += 1;
    }
    Ok(BisectionResult { l, u, iterations })
}

/// Algorithm 1. Requires `C((U, x), T) > b ≥ C((L, x), T)`; `L` may exceed
/// `U`. When `|L − U| ≤ eps` the pair is returned without evaluating the
/// score; otherwise the entry contract is checked with two evaluations that
/// are not counted as iterations.
pub fn bisection(
    c: &ConformityScore,
    x_new: &[f64],
    data: &DataSet,
    b: f64,
    lower: f64,
    upper: f64,
    eps: f64,
) -> Result<BisectionResult> {
    if !(eps > 0.0) {
        return Err(Error::Argument(format!("tolerance {eps} must be positive")));
    }
    if (lower - upper).abs() <= eps {
        return Ok(BisectionResult {
            l: lower,
            u: upper,
            iterations: 0,
        });
    }
    let scorer = c.candidate_scorer(x_new, data)?;
    let (cl, cu) = (scorer.eval(lower)?, scorer.eval(upper)?);
    if !(cu > b && b >= cl) {
        return Err(Error::Contract(format!(
            "bisection needs C(U) > b >= C(L); got C(L) = {cl}, C(U) = {cu}, b = {b}"
        )));
    }
    bisect(&mut |y| scorer.eval(y), b, lower, upper, eps)
}

/// Algorithm 2 on a score closure.
fn minimize<F>(score: &mut F, mut lower: f64, mut upper: f64, eps: f64) -> Result<MinimizerResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c_l = score(lower)?;
    let mut c_u = score(upper)?;
    let mut s = lower + (1.0 - g) * (upper - lower);
    let mut t = lower + g * (upper - lower);
    let mut c_s = score(s)?;
    let mut c_t = score(t)?;
    let mut evaluations = 4;
    while upper - lower > eps {
        if c_s > c_t {
            lower = s;
            c_l = c_s;
            s = t;
            t = lower + g * (upper - lower);
            c_s = c_t;
            c_t = score(t)?;
        } else {
            upper = t;
            c_u = c_t;
            t = s;
            s = lower + (1.0 - g) * (upper - lower);
            c_t = c_s;
            c_s = score(s)?;
        }
        evaluations += 1;
    }
    Ok(if c_l < c_u {
        MinimizerResult {
            m: lower,
            big_m: upper,
            score_m: c_l,
            score_big_m: c_u,
            evaluations,
        }
    } else {
        MinimizerResult {
            m: upper,
            big_m: lower,
            score_m: c_u,
            score_big_m: c_l,
            evaluations,
        }
    })
}

/// Algorithm 2: golden-section search on `[L, U]`.
pub fn golden_minimizer(
    c: &ConformityScore,
    x_new: &[f64],
    data: &DataSet,
    lower: f64,
    upper: f64,
    eps: f64,
) -> Result<MinimizerResult> {
    if !(lower < upper) {
        return Err(Error::Argument(format!("minimizer needs L < U, got [{lower}, {upper}]")));
    }
    if !(eps > 0.0) {
        return Err(Error::Argument(format!("tolerance {eps} must be positive")));
    }
    let scorer = c.candidate_scorer(x_new, data)?;
    minimize(&mut |y| scorer.eval(y), lower, upper, eps)
}

/// Algorithm 3 on an arbitrary score closure with threshold `b`.
///
/// Exposed so the refit accounting and the branch logic can be exercised
/// on synthetic unimodal functions.
pub fn unimodal_interval<F>(score: F, b: f64, eps: f64, k: i32) -> Result<(IntervalUnion, u64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let two_k = 2f64.powi(k);
    if !(eps > 0.0 && eps <= two_k) {
        return Err(Error::Argument(format!("tolerance {eps} must lie in (0, 2^K] = (0, {two_k}]")));
    }
    let count = Cell::new(0u64);
    let mut counted = |y: f64| {
        count.set(count.get() + 1);
        score(y)
    };
    let c1 = counted(-two_k)?;
    let c2 = counted(two_k)?;
    let interval = if c1.max(c2) <= b {
        IntervalUnion::real_line()
    } else if c1 <= b && b < c2 {
        let r = bisect(&mut counted, b, -two_k, two_k, eps)?;
        IntervalUnion::single(Interval::new(f64::NEG_INFINITY, false, r.u, true))
    } else if c2 <= b && b < c1 {
        let r = bisect(&mut counted, b, two_k, -two_k, eps)?;
        IntervalUnion::single(Interval::new(r.u, true, f64::INFINITY, false))
    } else {
        let min = minimize(&mut counted, -two_k, two_k, eps)?;
        if min.m == -two_k {
            IntervalUnion::single(Interval::open(f64::NEG_INFINITY, -two_k + eps))
        } else if min.m == two_k {
            IntervalUnion::single(Interval::open(two_k - eps, f64::INFINITY))
        } else if min.score_m > b {
            IntervalUnion::single(Interval::open(min.m.min(min.big_m), min.m.max(min.big_m)))
        } else {
            // outer points -2^K and 2^K have scores c1, c2 > b; m has C(m) <= b
            let left = bisect(&mut counted, b, min.m, -two_k, eps)?;
            let right = bisect(&mut counted, b, min.m, two_k, eps)?;
            IntervalUnion::single(Interval::closed(left.u, right.u))
        }
    };
    Ok((interval, count.get()))
}

/// Algorithm 3: shortcut set of a unimodal score by bisection and
/// golden-section search, without a grid.
pub fn shortcut_unimodal(
    c: &ConformityScore,
    data: &DataSet,
    x_new: &[f64],
    alpha: f64,
    delta: f64,
    eps: f64,
    k: i32,
) -> Result<UnimodalRunReport> {
    if !c.unimodal_hint() {
        return Err(Error::Precondition(format!("{} is not marked unimodal", c.label())));
    }
    let two_k = 2f64.powi(k);
    if !(eps > 0.0 && eps <= two_k) {
        return Err(Error::Argument(format!("tolerance {eps} must lie in (0, 2^K] = (0, {two_k}]")));
    }
    let b = threshold(shortcut_quantile(c, data, alpha)?, delta).value();
    let scorer = c.candidate_scorer(x_new, data)?;
    let (interval, refits) = unimodal_interval(|y| scorer.eval(y), b, eps, k)?;
    Ok(UnimodalRunReport {
        interval,
        refits,
        bound: refit_bound(k, eps),
        epsilon: eps,
        k,
        reference_fits: data.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ExtendedReal;
    use crate::predictors::{AffineCoefficients, Predictor};
    use crate::sets::shortcut::shortcut_affine;

    fn abs_score() -> ConformityScore {
        ConformityScore::custom("abs", |y, _, _| Ok(y.abs()), true)
    }

    fn one_point() -> DataSet {
        DataSet::from_rows(1, &[1.0, -2.0, 3.0], &[vec![0.0], vec![1.0], vec![2.0]]).unwrap()
    }

    #[test]
    fn refit_bound_examples() {
        assert_eq!(refit_bound(10, 2f64.powi(-10)), 82.0);
        assert!(refit_bound(10, 2f64.powi(-10)) <= 13.45 + 3.45 * 20.0);
        assert_eq!(refit_bound(10, 2f64.powi(10)), 13.0);
    }

    #[test]
    fn bisection_examples() {
        let c = abs_score();
        let d = one_point();
        let r = bisection(&c, &[0.0], &d, 1.0, 0.0, 2.0, 0.5).unwrap();
        assert_eq!((r.l, r.u, r.iterations), (1.0, 1.5, 2));
        assert!(matches!(bisection(&c, &[0.0], &d, 5.0, 0.0, 2.0, 0.5), Err(Error::Contract(_))));
        let r = bisection(&c, &[0.0], &d, 5.0, 0.0, 0.25, 0.5).unwrap();
        assert_eq!((r.l, r.u, r.iterations), (0.0, 0.25, 0));
        // reversed orientation, as in Algorithm 3
        let r = bisection(&c, &[0.0], &d, 1.0, 0.0, -2.0, 1e-3).unwrap();
        assert!(r.u < -1.0 && r.l >= -1.0 && (r.l - r.u).abs() <= 1e-3);
        assert!(r.iterations as f64 <= (2.0f64 / 1e-3).log2().ceil());
    }

    #[test]
    fn minimizer_examples() {
        let c = abs_score();
        let d = one_point();
        let r = golden_minimizer(&c, &[0.0], &d, -1.0, 1.0, 0.01).unwrap();
        assert!(r.m.abs() <= 0.01 && (r.m - r.big_m).abs() <= 0.01);
        assert!(r.score_m <= r.score_big_m);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let cap = 4.0 + ((2f64.log2() - 0.01f64.log2()) / -g.log2()).ceil();
        assert!(r.evaluations as f64 <= cap);
        assert!(golden_minimizer(&c, &[0.0], &d, 1.0, 1.0, 0.01).is_err());
        // shifted minimum
        let shifted = ConformityScore::custom("shift", |y, _, _| Ok((y - 0.3).abs()), true);
        let r = golden_minimizer(&shifted, &[0.0], &d, -1.0, 1.0, 1e-6).unwrap();
        assert!((r.m - 0.3).abs() <= 1e-6);
    }

    #[test]
    fn algorithm3_branches() {
        // everything below the threshold
        let (iv, refits) = unimodal_interval(|y| Ok(y.abs() * 1e-9), 1.0, 0.25, 3).unwrap();
        assert_eq!(iv, IntervalUnion::real_line());
        assert_eq!(refits, 2);
        // decreasing score: half-line to the right
        let (iv, _) = unimodal_interval(|y| Ok(-y), 1.0, 1.0 / 64.0, 3).unwrap();
        let i = iv.intervals()[0];
        assert!(i.upper.value() == f64::INFINITY && i.lower.value() < -1.0 && i.lower.value() >= -1.0 - 1.0 / 64.0);
        // increasing score: half-line to the left
        let (iv, _) = unimodal_interval(|y| Ok(y), 1.0, 1.0 / 64.0, 3).unwrap();
        let i = iv.intervals()[0];
        assert!(i.lower.value() == f64::NEG_INFINITY && i.upper.value() > 1.0 && i.upper.value() <= 1.0 + 1.0 / 64.0);
        // minimum left of the window
        let (iv, _) = unimodal_interval(|y| Ok((y + 100.0).abs()), 1.0, 1.0 / 64.0, 3).unwrap();
        assert_eq!(iv, IntervalUnion::single(Interval::open(f64::NEG_INFINITY, -8.0 + 1.0 / 64.0)));
        // minimum right of the window
        let (iv, _) = unimodal_interval(|y| Ok((y - 100.0).abs()), 1.0, 1.0 / 64.0, 3).unwrap();
        assert_eq!(iv, IntervalUnion::single(Interval::open(8.0 - 1.0 / 64.0, f64::INFINITY)));
        // threshold below the minimum: a tiny open interval around the mode
        let (iv, _) = unimodal_interval(|y| Ok((y - 0.3).abs() + 2.0), 1.0, 1.0 / 64.0, 3).unwrap();
        assert!(iv.length() <= 1.0 / 64.0 && iv.intervals()[0].lower.value() <= 0.3 && iv.intervals()[0].upper.value() >= 0.3);
        assert!(unimodal_interval(|y| Ok(y), 1.0, 16.0, 3).is_err());
    }

    #[test]
    fn algorithm3_matches_affine_zero_predictor() {
        let zero = ConformityScore::out_sample(Predictor::constant_zero());
        let d = one_point();
        let eps = 1.0 / 64.0;
        let report = shortcut_unimodal(&zero, &d, &[0.5], 0.25, 0.0, eps, 3).unwrap();
        let exact = shortcut_affine(AffineCoefficients { a: 1.0, b: 0.0 }, ExtendedReal::new(3.0), 0.0);
        let iv = report.interval.intervals()[0];
        assert!(iv.lower.value() <= -3.0 && iv.upper.value() >= 3.0);
        assert!(report.interval.length() - exact.length() <= 2.0 * eps);
        assert!(report.refits as f64 <= report.bound);
        assert_eq!(report.reference_fits, 3);
        let no_hint = zero.clone().with_unimodal_hint(false);
        assert!(matches!(shortcut_unimodal(&no_hint, &d, &[0.5], 0.25, 0.0, eps, 3), Err(Error::Precondition(_))));
    }
}
