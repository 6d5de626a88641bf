//! Order-independent floating point summation.
//!
//! Symmetric predictors must return bit-identical output under any
//! permutation of the training data. A naive left-to-right sum does not
//! have that property, so sums over training responses go through
//! [`exact_sum`], which returns the correctly rounded value of the exact
//! real sum and therefore cannot depend on the input order.

/// Correctly rounded sum of `values` (Shewchuk's partials with the
/// round-half-even fix-up used by Python's `math.fsum`).
///
/// Inputs must be finite.
pub fn exact_sum<I>(values: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let mut acc = ExactAccumulator::new();
    for x in values {
        acc.add(x);
    }
    acc.value()
}

/// Running exact sum. Cloning an accumulator and adding or subtracting a few
/// more terms yields the correctly rounded sum of the modified multiset, so a
/// leave-one-out sum costs O(#partials) instead of O(n) and is still bitwise
/// equal to [`exact_sum`] over the modified values.
#[derive(Debug, Clone, Default)]
pub struct ExactAccumulator {
    partials: Vec<f64>,
}

impl ExactAccumulator {
    pub fn new() -> Self {
        Self { partials: Vec::with_capacity(8) }
    }

    pub fn add(&mut self, mut x: f64) {
        let partials = &mut self.partials;
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }

    /// Correctly rounded value of the exact sum so far.
    pub fn value(&self) -> f64 {
        let partials = &self.partials;
        let mut n = partials.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = partials[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = partials[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

/// Arithmetic mean via [`exact_sum`]; `None` for an empty input.
pub fn exact_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(exact_sum(values.iter().copied()) / values.len() as f64)
    }
}
