//! Lévy gauge between step functions, the Lévy metric, the quantile
//! inequality and the squared-distance upper bounds.
//!
//! Everything is computed exactly over breakpoints. For right-continuous
//! step functions `A` and `B`, `t -> A(t) - B(t)` is itself a right-continuous
//! step function, so its supremum is the largest value it takes at a
//! breakpoint of either function (or 0 on the leftmost piece).

use serde::{Deserialize, Serialize};

use crate::ecdf::StepFunction;
use crate::error::{Error, Result};

/// Gauge value together with the tolerance it was computed for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeResult {
    pub epsilon: f64,
    pub delta: f64,
}

/// Floating point allowance used when a property compares two separately
/// rounded gauge expressions. Distinct ECDF levels with denominators below
/// 10^5 are at least 10^-10 apart, so this never changes an exact answer.
pub const ROUNDING_SLACK: f64 = 1e-12;

/// Accuracy of [`levy_metric`].
pub const METRIC_ACCURACY: f64 = 1e-9;

/// `sup_t (a(t) - b(t))`, including the value 0 on the leftmost piece.
fn sup_difference(a: &StepFunction, b: &StepFunction) -> f64 {
    let (ab, av) = (a.breakpoints(), a.values());
    let (bb, bv) = (b.breakpoints(), b.values());
    let (mut i, mut j) = (0usize, 0usize);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut best = 0.0f64;
    while i < ab.len() || j < bb.len() {
        let next_a = ab.get(i).copied().unwrap_or(f64::INFINITY);
        let next_b = bb.get(j).copied().unwrap_or(f64::INFINITY);
        let t = next_a.min(next_b);
        while i < ab.len() && ab[i] == t {
            fa = av[i];
            i += 1;
        }
        while j < bb.len() && bb[j] == t {
            fb = bv[j];
            j += 1;
        }
        best = best.max(fa - fb);
    }
    best
}

/// `ld_delta(F, G) = sup_t max(F(t) - G(t + delta), G(t) - F(t + delta))`,
/// clamped to `[0, 1]`.
pub fn levy_gauge(f: &StepFunction, g: &StepFunction, delta: f64) -> Result<GaugeResult> {
    if !(delta >= 0.0) {
        return Err(Error::Argument(format!("gauge tolerance {delta} must be nonnegative")));
    }
    let epsilon = if delta.is_infinite() {
        0.0
    } else {
        // G(t + delta) as a function of t has its jumps at b - delta.
        let g_ahead = g.translated(-delta);
        let f_ahead = f.translated(-delta);
        sup_difference(f, &g_ahead)
            .max(sup_difference(g, &f_ahead))
            .clamp(0.0, 1.0)
    };
    Ok(GaugeResult { epsilon, delta })
}

/// Lévy metric by bisection on `eps` over `[0, 1]`, using
/// `L(F, G) = inf { eps : ld_eps(F, G) <= eps }`. Absolute accuracy 1e-9;
/// the returned value is always feasible.
pub fn levy_metric(f: &StepFunction, g: &StepFunction) -> f64 {
    let feasible = |eps: f64| {
        levy_gauge(f, g, eps)
            .map(|r| r.epsilon <= eps)
            .unwrap_or(false)
    };
    if feasible(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 0.5 * METRIC_ACCURACY {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `∫_{[lo, hi]} |F - G|^2` computed exactly over merged breakpoints.
/// Either bound may be infinite.
pub fn integrated_squared_difference(f: &StepFunction, g: &StepFunction, lo: f64, hi: f64) -> f64 {
    if !(lo < hi) {
        return 0.0;
    }
    let mut cuts: Vec<f64> = f.breakpoints().iter().chain(g.breakpoints()).copied().collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let tail = f.terminal_value() - g.terminal_value();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let d = f.eval(w[0]) - g.eval(w[0]);
        let a = w[0].max(lo);
        let b = w[1].min(hi);
        if b > a && d != 0.0 {
            total += d * d * (b - a);
        }
    }
    if let Some(&last) = cuts.last() {
        if tail != 0.0 && hi > last {
            total += tail * tail * (hi - last.max(lo));
        }
    }
    total
}

/// The two gauge upper bounds `(windowed, global)` for `delta > 0`, window
/// half-width `k >= 0` and center `mu`.
pub fn gauge_upper_bounds(
    f: &StepFunction,
    g: &StepFunction,
    delta: f64,
    k: f64,
    mu: f64,
) -> Result<(f64, f64)> {
    if !(delta > 0.0) {
        return Err(Error::Argument(format!("delta {delta} must be positive")));
    }
    if !(k >= 0.0) {
        return Err(Error::Argument(format!("window half-width {k} must be nonnegative")));
    }
    let window = integrated_squared_difference(f, g, -k + mu - delta, k + mu + 2.0 * delta);
    let windowed = 1.0 - f.eval(k + mu) + f.eval(-k + mu) + (window / delta).sqrt();
    let global = (integrated_squared_difference(f, g, f64::NEG_INFINITY, f64::INFINITY) / delta).sqrt();
    Ok((windowed, global))
}

/// Whether `Q_{a-ld}(F) - delta <= Q_a(G) <= Q_{a+ld}(F) + delta` holds with
/// `ld = ld_delta(F, G)` under the extended-real conventions.
///
/// The gauge is widened by [`ROUNDING_SLACK`] so that a level computed as
/// `alpha ± ld` is never pushed across an ECDF level by rounding alone.
pub fn check_quantile_inequality(f: &StepFunction, g: &StepFunction, delta: f64, alpha: f64) -> Result<bool> {
    let ld = levy_gauge(f, g, delta)?.epsilon + ROUNDING_SLACK;
    let lower = f.quantile(alpha - ld).value() - delta;
    let middle = g.quantile(alpha).value();
    let upper = f.quantile(alpha + ld).value() + delta;
    // -inf - delta stays -inf and +inf + delta stays +inf
    Ok(lower <= middle && middle <= upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecdf::build_ecdf;
    use proptest::prelude::*;

    fn ecdf(v: &[f64]) -> StepFunction {
        build_ecdf(v).unwrap()
    }

    /// Independent oracle: evaluates both one-sided differences directly on a
    /// dense grid plus every breakpoint and shifted breakpoint.
    fn gauge_oracle(f: &StepFunction, g: &StepFunction, delta: f64) -> f64 {
        let mut ts: Vec<f64> = Vec::new();
        for b in f.breakpoints().iter().chain(g.breakpoints()) {
            ts.push(*b);
            ts.push(b - delta);
        }
        let lo = ts.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
        let hi = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
        let m = 100_000;
        for i in 0..=m {
            ts.push(lo + (hi - lo) * i as f64 / m as f64);
        }
        ts.iter()
            .map(|&t| (f.eval(t) - g.eval(t + delta)).max(g.eval(t) - f.eval(t + delta)))
            .fold(0.0, f64::max)
    }

    #[test]
    fn gauge_examples() {
        let f = ecdf(&[0.0, 1.5, 2.0]);
        assert_eq!(levy_gauge(&f, &f, 0.3).unwrap().epsilon, 0.0);
        let (a, b) = (ecdf(&[0.0]), ecdf(&[1.0]));
        assert_eq!(levy_gauge(&a, &b, 0.0).unwrap().epsilon, 1.0);
        assert_eq!(levy_gauge(&a, &b, 1.0).unwrap().epsilon, 0.0);
        assert_eq!(gauge_oracle(&a, &b, 1.0), 0.0);
        assert_eq!(levy_gauge(&a, &b, 0.999).unwrap().epsilon, 1.0);
        assert!(levy_gauge(&a, &b, -0.1).is_err());
    }

    #[test]
    fn metric_examples() {
        let f = ecdf(&[0.0, 1.0]);
        assert_eq!(levy_metric(&f, &f), 0.0);
        assert!((levy_metric(&ecdf(&[0.0]), &ecdf(&[0.3])) - 0.3).abs() <= METRIC_ACCURACY);
        assert!((levy_metric(&ecdf(&[0.0]), &ecdf(&[1.0])) - 1.0).abs() <= METRIC_ACCURACY);
    }

    /// Grid scan over eps of the defining bracket, as an oracle for the metric.
    fn metric_oracle(f: &StepFunction, g: &StepFunction) -> f64 {
        let m = 2000;
        (0..=m)
            .map(|i| i as f64 / m as f64)
            .find(|&eps| gauge_oracle(f, g, eps) <= eps)
            .unwrap_or(1.0)
    }

    #[test]
    fn metric_matches_scan_oracle() {
        let f = ecdf(&[0.0, 0.25, 0.5]);
        let g = ecdf(&[0.125, 0.75]);
        let exact = levy_metric(&f, &g);
        let scanned = metric_oracle(&f, &g);
        assert!((exact - scanned).abs() <= 1.0 / 2000.0 + METRIC_ACCURACY, "{exact} vs {scanned}");
    }

    #[test]
    fn bound_examples() {
        let f = ecdf(&[0.0]);
        let (_, global) = gauge_upper_bounds(&f, &f, 0.5, 1.0, 0.0).unwrap();
        assert_eq!(global, 0.0);
        let (_, global) = gauge_upper_bounds(&ecdf(&[0.0]), &ecdf(&[1.0]), 1.0, 1.0, 0.0).unwrap();
        assert_eq!(global, 1.0);
        // Lemma C.10 evaluates the right-continuous F at -K+mu, so with
        // K = 0 the tail term is 1 - F(0) + F(0) = 1 (see the decisions ledger).
        let (windowed, _) = gauge_upper_bounds(&f, &f, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(windowed, 1.0);
        let (windowed, _) = gauge_upper_bounds(&f, &f, 1.0, 10.0, 0.0).unwrap();
        assert_eq!(windowed, 0.0);
        assert!(gauge_upper_bounds(&f, &f, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn quantile_inequality_examples() {
        let f = ecdf(&[0.5, 1.0, 4.0]);
        assert!(check_quantile_inequality(&f, &f, 0.0, 0.4).unwrap());
        let g = ecdf(&[0.1, 2.0, 2.5, 3.0]);
        assert!(check_quantile_inequality(&f, &g, 0.1, 0.5).unwrap());
        assert!(check_quantile_inequality(&f, &g, 0.1, 1.5).unwrap());
    }

    // Dyadic breakpoints keep every shift and evaluation exact, so the
    // oracle and the breakpoint enumeration must agree to the last bit.
    fn dyadic_ecdf() -> impl Strategy<Value = StepFunction> {
        prop::collection::vec(-64i32..64, 1..12)
            .prop_map(|v| ecdf(&v.into_iter().map(|x| x as f64 / 16.0).collect::<Vec<_>>()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn gauge_matches_brute_force(f in dyadic_ecdf(), g in dyadic_ecdf(), d in 0i32..40) {
            let delta = d as f64 / 16.0;
            let exact = levy_gauge(&f, &g, delta).unwrap().epsilon;
            prop_assert!((exact - gauge_oracle(&f, &g, delta)).abs() <= 1e-12);
        }

        #[test]
        fn gauge_symmetric_and_monotone(f in dyadic_ecdf(), g in dyadic_ecdf(), d1 in 0f64..3.0, d2 in 0f64..3.0) {
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let a = levy_gauge(&f, &g, lo).unwrap().epsilon;
            prop_assert_eq!(a, levy_gauge(&g, &f, lo).unwrap().epsilon);
            prop_assert!(a >= levy_gauge(&f, &g, hi).unwrap().epsilon);
        }
    }
}
