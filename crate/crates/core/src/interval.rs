//! Prediction sets as finite unions of disjoint real intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ExtendedReal;

/// One interval with independently open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: ExtendedReal,
    pub lower_closed: bool,
    pub upper: ExtendedReal,
    pub upper_closed: bool,
}

impl Interval {
    pub fn closed(lower: f64, upper: f64) -> Self {
        Self::new(lower, true, upper, true)
    }

    pub fn open(lower: f64, upper: f64) -> Self {
        Self::new(lower, false, upper, false)
    }

    /// Infinite ends are always stored as open.
    pub fn new(lower: f64, lower_closed: bool, upper: f64, upper_closed: bool) -> Self {
        Self {
            lower: ExtendedReal::new(lower),
            lower_closed: lower_closed && lower.is_finite(),
            upper: ExtendedReal::new(upper),
            upper_closed: upper_closed && upper.is_finite(),
        }
    }

    pub fn real_line() -> Self {
        Self::new(f64::NEG_INFINITY, false, f64::INFINITY, false)
    }

    pub fn is_empty(&self) -> bool {
        let (lo, hi) = (self.lower.value(), self.upper.value());
        lo > hi || (lo == hi && !(self.lower_closed && self.upper_closed)) || lo == f64::INFINITY || hi == f64::NEG_INFINITY
    }

    pub fn contains(&self, y: f64) -> bool {
        let (lo, hi) = (self.lower.value(), self.upper.value());
        let above = if self.lower_closed { y >= lo } else { y > lo };
        let below = if self.upper_closed { y <= hi } else { y < hi };
        above && below
    }

    /// Lebesgue measure; endpoint flags are irrelevant.
    pub fn length(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.upper.value() - self.lower.value()
        }
    }
}

/// A sorted union of pairwise disjoint, non-adjacent intervals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntervalUnion {
    intervals: Vec<Interval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn real_line() -> Self {
        Self {
            intervals: vec![Interval::real_line()],
        }
    }

    pub fn single(interval: Interval) -> Self {
        Self::from_intervals(vec![interval])
    }

    /// Normalizes arbitrary (possibly overlapping, unsorted, empty) pieces.
    pub fn from_intervals(mut pieces: Vec<Interval>) -> Self {
        pieces.retain(|iv| !iv.is_empty());
        pieces.sort_by(|a, b| {
            a.lower
                .cmp(&b.lower)
                .then_with(|| b.lower_closed.cmp(&a.lower_closed))
        });
        let mut merged: Vec<Interval> = Vec::with_capacity(pieces.len());
        for iv in pieces {
            if let Some(last) = merged.last_mut() {
                let touches = last.upper > iv.lower
                    || (last.upper == iv.lower && (last.upper_closed || iv.lower_closed));
                if touches {
                    if iv.upper > last.upper {
                        last.upper = iv.upper;
                        last.upper_closed = iv.upper_closed;
                    } else if iv.upper == last.upper {
                        last.upper_closed |= iv.upper_closed;
                    }
                    continue;
                }
            }
            merged.push(iv);
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Binary search over the sorted pieces.
    pub fn contains(&self, y: f64) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.lower.value() <= y);
        idx > 0 && self.intervals[idx - 1].contains(y)
    }

    /// Total Lebesgue measure, possibly `+inf`.
    pub fn length(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals
            .iter()
            .all(|iv| iv.lower.is_finite() && iv.upper.is_finite())
    }

    /// Intersection with `[lo, hi]`.
    pub fn clip(&self, lo: f64, hi: f64) -> Self {
        let pieces = self
            .intervals
            .iter()
            .map(|iv| {
                let (l, lc) = if iv.lower.value() < lo {
                    (lo, true)
                } else {
                    (iv.lower.value(), iv.lower_closed)
                };
                let (u, uc) = if iv.upper.value() > hi {
                    (hi, true)
                } else {
                    (iv.upper.value(), iv.upper_closed)
                };
                Interval::new(l, lc, u, uc)
            })
            .collect();
        Self::from_intervals(pieces)
    }

    /// Set inclusion `self ⊆ other`, honoring endpoint closedness. Pieces of a
    /// normalized union are separated by gaps, so each connected piece of
    /// `self` must sit inside a single piece of `other`.
    pub fn is_subset_of(&self, other: &IntervalUnion) -> bool {
        self.intervals.iter().all(|iv| {
            other.intervals.iter().any(|o| {
                let lower_ok = o.lower < iv.lower || (o.lower == iv.lower && (o.lower_closed || !iv.lower_closed));
                let upper_ok = o.upper > iv.upper || (o.upper == iv.upper && (o.upper_closed || !iv.upper_closed));
                lower_ok && upper_ok
            })
        })
    }

    /// Smallest lower and largest upper endpoint, if nonempty.
    pub fn hull(&self) -> Option<(ExtendedReal, ExtendedReal)> {
        Some((self.intervals.first()?.lower, self.intervals.last()?.upper))
    }
}

/// Lebesgue measure of `a \ b`.
pub fn difference_length(a: &IntervalUnion, b: &IntervalUnion) -> f64 {
    let mut cuts: Vec<f64> = a
        .intervals()
        .iter()
        .chain(b.intervals())
        .flat_map(|iv| [iv.lower.value(), iv.upper.value()])
        .filter(|v| v.is_finite())
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let differs = |y: f64| a.contains(y) && !b.contains(y);
    if cuts.is_empty() {
        return if differs(0.0) { f64::INFINITY } else { 0.0 };
    }
    let first = cuts[0];
    let last = cuts[cuts.len() - 1];
    if differs(first - 1.0) || differs(last + 1.0) {
        return f64::INFINITY;
    }
    cuts.windows(2)
        .filter(|w| differs(0.5 * (w[0] + w[1])))
        .map(|w| w[1] - w[0])
        .sum()
}

/// Lebesgue measure of `(a \ b) ∪ (b \ a)`.
pub fn symmetric_difference_length(a: &IntervalUnion, b: &IntervalUnion) -> ExtendedReal {
    // `+ 0.0` normalizes a negative zero
    ExtendedReal::new(difference_length(a, b) + difference_length(b, a) + 0.0)
}

/// A uniform grid `lo, lo + step, ..., <= hi` used to realize prediction sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let g = Self { lo, hi, step };
        g.validate()?;
        Ok(g)
    }

    /// `points` equally spaced points covering `[lo, hi]`.
    pub fn with_points(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::Config("a grid needs at least two points".into()));
        }
        Self::new(lo, hi, (hi - lo) / (points - 1) as f64)
    }

    /// Default realization window `center ± 10·scale` with 4001 points.
    pub fn around(center: f64, scale: f64) -> Result<Self> {
        let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
        Self::with_points(center - 10.0 * scale, center + 10.0 * scale, 4001)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.step.is_finite()) {
            return Err(Error::Config("grid bounds and step must be finite".into()));
        }
        if self.step <= 0.0 || self.lo >= self.hi {
            return Err(Error::Config(format!(
                "invalid grid [{}, {}] with step {}",
                self.lo, self.hi, self.step
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        (self.lo + i as f64 * self.step).min(self.hi)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }
}

/// Union of the maximal runs of grid points where `member` holds, each
/// widened by half a step and clipped to the grid bounds.
pub fn union_from_flags(grid: &GridSpec, member: &[bool]) -> Result<IntervalUnion> {
    grid.validate()?;
    if member.len() != grid.len() {
        return Err(Error::Argument(format!(
            "{} membership flags for a grid of {} points",
            member.len(),
            grid.len()
        )));
    }
    let half = 0.5 * grid.step;
    let mut pieces = Vec::new();
    let mut i = 0;
    while i < member.len() {
        if !member[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < member.len() && member[i] {
            i += 1;
        }
        let lo = (grid.point(start) - half).max(grid.lo);
        let hi = (grid.point(i - 1) + half).min(grid.hi);
        pieces.push(Interval::closed(lo, hi));
    }
    Ok(IntervalUnion::from_intervals(pieces))
}

/// Grid realization of `{y : pred(y)}`.
pub fn interval_union_from_predicate<P>(mut pred: P, grid: &GridSpec) -> Result<IntervalUnion>
where
    P: FnMut(f64) -> bool,
{
    grid.validate()?;
    let flags: Vec<bool> = grid.points().map(&mut pred).collect();
    union_from_flags(grid, &flags)
}

/// Fallible variant of [`interval_union_from_predicate`].
pub fn try_interval_union_from_predicate<P>(mut pred: P, grid: &GridSpec) -> Result<IntervalUnion>
where
    P: FnMut(f64) -> Result<bool>,
{
    grid.validate()?;
    let flags = grid.points().map(&mut pred).collect::<Result<Vec<bool>>>()?;
    union_from_flags(grid, &flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_examples() {
        let closed = IntervalUnion::single(Interval::closed(0.0, 1.0));
        let open = IntervalUnion::single(Interval::open(0.0, 1.0));
        assert!(open.is_subset_of(&closed));
        assert!(!closed.is_subset_of(&open));
        assert!(IntervalUnion::empty().is_subset_of(&open));
        assert!(closed.is_subset_of(&IntervalUnion::real_line()));
        let two = IntervalUnion::from_intervals(vec![Interval::closed(0.0, 1.0), Interval::closed(2.0, 3.0)]);
        assert!(!IntervalUnion::single(Interval::closed(0.5, 2.5)).is_subset_of(&two));
        assert!(IntervalUnion::single(Interval::closed(2.5, 3.0)).is_subset_of(&two));
    }
    use proptest::prelude::*;

    fn grid(lo: f64, hi: f64, h: f64) -> GridSpec {
        GridSpec::new(lo, hi, h).unwrap()
    }

    #[test]
    fn predicate_examples() {
        let g = grid(-1.0, 1.0, 0.5);
        assert_eq!(g.len(), 5);
        assert!(interval_union_from_predicate(|_| false, &g).unwrap().is_empty());
        let all = interval_union_from_predicate(|_| true, &g).unwrap();
        assert_eq!(all, IntervalUnion::single(Interval::closed(-1.0, 1.0)));
        let mid = interval_union_from_predicate(|y| y.abs() <= 0.6, &g).unwrap();
        assert_eq!(mid, IntervalUnion::single(Interval::closed(-0.75, 0.75)));
    }

    #[test]
    fn runs_split_by_one_false_point_stay_separate() {
        let g = grid(0.0, 4.0, 1.0);
        let u = interval_union_from_predicate(|y| y != 2.0, &g).unwrap();
        assert_eq!(u.intervals().len(), 2);
        assert_eq!(u.length(), 3.0);
    }

    #[test]
    fn invalid_grids_rejected() {
        assert!(GridSpec::new(0.0, 1.0, 0.0).is_err());
        assert!(GridSpec::new(1.0, 1.0, 0.1).is_err());
        assert!(GridSpec::new(2.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn symmetric_difference_examples() {
        let a = IntervalUnion::single(Interval::closed(0.0, 2.0));
        let b = IntervalUnion::single(Interval::closed(1.0, 3.0));
        assert_eq!(symmetric_difference_length(&a, &a).value(), 0.0);
        assert_eq!(symmetric_difference_length(&a, &b).value(), 2.0);
        let ray = IntervalUnion::single(Interval::new(0.0, true, f64::INFINITY, false));
        let unit = IntervalUnion::single(Interval::closed(0.0, 1.0));
        assert_eq!(symmetric_difference_length(&ray, &unit), ExtendedReal::INFINITY);
        assert_eq!(symmetric_difference_length(&IntervalUnion::real_line(), &IntervalUnion::real_line()).value(), 0.0);
        assert_eq!(
            symmetric_difference_length(&IntervalUnion::real_line(), &IntervalUnion::empty()),
            ExtendedReal::INFINITY
        );
    }

    #[test]
    fn merge_rules() {
        let u = IntervalUnion::from_intervals(vec![
            Interval::new(1.0, true, 2.0, true),
            Interval::new(0.0, true, 1.0, false),
        ]);
        assert_eq!(u.intervals().len(), 1);
        let v = IntervalUnion::from_intervals(vec![Interval::open(0.0, 1.0), Interval::open(1.0, 2.0)]);
        assert_eq!(v.intervals().len(), 2);
        assert!(!v.contains(1.0));
        assert!(v.contains(0.5) && v.contains(1.5));
        let w = IntervalUnion::from_intervals(vec![Interval::closed(0.0, 5.0), Interval::closed(1.0, 2.0)]);
        assert_eq!(w, IntervalUnion::single(Interval::closed(0.0, 5.0)));
        assert!(IntervalUnion::single(Interval::open(1.0, 1.0)).is_empty());
        assert_eq!(IntervalUnion::single(Interval::closed(1.0, 1.0)).intervals().len(), 1);
    }

    fn arb_union() -> impl Strategy<Value = IntervalUnion> {
        prop::collection::vec((-20i32..20, 0i32..8, any::<bool>(), any::<bool>()), 0..6).prop_map(|v| {
            IntervalUnion::from_intervals(
                v.into_iter()
                    .map(|(l, w, lc, uc)| Interval::new(l as f64 * 0.5, lc, (l + w) as f64 * 0.5, uc))
                    .collect(),
            )
        })
    }

    /// Unions whose pieces have positive length, so grid probes can see them.
    fn arb_fat_union() -> impl Strategy<Value = IntervalUnion> {
        prop::collection::vec((-20i32..20, 1i32..8, any::<bool>(), any::<bool>()), 0..6).prop_map(|v| {
            IntervalUnion::from_intervals(
                v.into_iter()
                    .map(|(l, w, lc, uc)| Interval::new(l as f64 * 0.5, lc, (l + w) as f64 * 0.5, uc))
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn normalization_idempotent(u in arb_union()) {
            let again = IntervalUnion::from_intervals(u.intervals().to_vec());
            prop_assert_eq!(&again, &u);
            for w in u.intervals().windows(2) {
                prop_assert!(w[0].upper <= w[1].lower);
            }
        }

        #[test]
        fn symmetric_difference_symmetric_nonnegative(a in arb_union(), b in arb_union()) {
            let ab = symmetric_difference_length(&a, &b);
            let ba = symmetric_difference_length(&b, &a);
            prop_assert_eq!(ab, ba);
            prop_assert!(ab.value() >= 0.0);
            prop_assert_eq!(symmetric_difference_length(&a, &a).value(), 0.0);
            // differing only in endpoint flags is a null set
            let flipped = IntervalUnion::from_intervals(
                a.intervals().iter().map(|iv| Interval::new(iv.lower.value(), !iv.lower_closed, iv.upper.value(), !iv.upper_closed)).collect(),
            );
            prop_assert_eq!(symmetric_difference_length(&a, &flipped).value(), 0.0);
        }

        #[test]
        fn predicate_recovers_union_within_step(a in arb_fat_union()) {
            let g = GridSpec::new(-12.0, 16.0, 0.05).unwrap();
            let clipped = a.clip(g.lo, g.hi);
            let rebuilt = interval_union_from_predicate(|y| clipped.contains(y), &g).unwrap();
            // Hausdorff distance at most one step, probed at grid points and midpoints
            for i in 0..2 * g.len() - 1 {
                let z = g.lo + 0.5 * i as f64 * g.step;
                if rebuilt.contains(z) {
                    prop_assert!((-2..=2).any(|k| clipped.contains(z + 0.5 * k as f64 * g.step)));
                }
                if clipped.contains(z) {
                    prop_assert!((-2..=2).any(|k| rebuilt.contains(z + 0.5 * k as f64 * g.step)));
                }
            }
        }
    }
}
