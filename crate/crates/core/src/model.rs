//! Shared domain types: observations, datasets, extended reals and the
//! seeded randomness contract.

use std::cmp::Ordering;
use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single `(response, features)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub response: f64,
    pub features: Vec<f64>,
}

impl Observation {
    pub fn new(response: f64, features: Vec<f64>) -> Self {
        Self { response, features }
    }
}

/// Ordered training data with a fixed feature dimension.
///
/// Rows are stored flat (row-major) so that leave-one-out and augmented
/// copies are a pair of `memcpy`s. The storage order carries no meaning:
/// every consumer documented as symmetric returns the same output for any
/// permutation of the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    responses: Vec<f64>,
    features: Vec<f64>,
    dim: usize,
}

impl DataSet {
    /// An empty dataset of feature dimension `dim`.
    pub fn empty(dim: usize) -> Self {
        Self {
            responses: Vec::new(),
            features: Vec::new(),
            dim,
        }
    }

    pub fn from_observations(dim: usize, observations: &[Observation]) -> Result<Self> {
        let mut data = Self::empty(dim);
        data.responses.reserve(observations.len());
        data.features.reserve(observations.len() * dim);
        for obs in observations {
            data.push(obs.response, &obs.features)?;
        }
        Ok(data)
    }

    /// Builds a dataset from parallel response / feature-row slices.
    pub fn from_rows(dim: usize, responses: &[f64], rows: &[Vec<f64>]) -> Result<Self> {
        if responses.len() != rows.len() {
            return Err(Error::Argument(format!(
                "{} responses but {} feature rows",
                responses.len(),
                rows.len()
            )));
        }
        let mut data = Self::empty(dim);
        for (y, x) in responses.iter().zip(rows) {
            data.push(*y, x)?;
        }
        Ok(data)
    }

    pub fn push(&mut self, response: f64, features: &[f64]) -> Result<()> {
        if features.len() != self.dim {
            return Err(Error::Argument(format!(
                "feature dimension {} does not match dataset dimension {}",
                features.len(),
                self.dim
            )));
        }
        if !response.is_finite() {
            return Err(Error::Argument(format!("response {response} is not finite")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("features must be finite".into()));
        }
        self.responses.push(response);
        self.features.extend_from_slice(features);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn response(&self, i: usize) -> f64 {
        self.responses[i]
    }

    pub fn features(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn observation(&self, i: usize) -> Observation {
        Observation::new(self.response(i), self.features(i).to_vec())
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        (0..self.len()).map(move |i| (self.response(i), self.features(i)))
    }

    /// Copy with row `i` removed (`T \ t_i`).
    pub fn without(&self, i: usize) -> DataSet {
        assert!(i < self.len(), "row {i} out of range for dataset of {}", self.len());
        let mut responses = Vec::with_capacity(self.len() - 1);
        responses.extend_from_slice(&self.responses[..i]);
        responses.extend_from_slice(&self.responses[i + 1..]);
        let mut features = Vec::with_capacity(self.features.len() - self.dim);
        features.extend_from_slice(&self.features[..i * self.dim]);
        features.extend_from_slice(&self.features[(i + 1) * self.dim..]);
        DataSet {
            responses,
            features,
            dim: self.dim,
        }
    }

    /// Copy with `(response, features)` appended as the last row.
    pub fn with_appended(&self, response: f64, features: &[f64]) -> Result<DataSet> {
        let mut out = DataSet {
            responses: Vec::with_capacity(self.len() + 1),
            features: Vec::with_capacity(self.features.len() + self.dim),
            dim: self.dim,
        };
        out.responses.extend_from_slice(&self.responses);
        out.features.extend_from_slice(&self.features);
        out.push(response, features)?;
        Ok(out)
    }

    /// Copy with row `i` replaced.
    pub fn with_replaced(&self, i: usize, response: f64, features: &[f64]) -> Result<DataSet> {
        if features.len() != self.dim {
            return Err(Error::Argument("replacement has the wrong dimension".into()));
        }
        let mut out = self.clone();
        out.responses[i] = response;
        out.features[i * self.dim..(i + 1) * self.dim].copy_from_slice(features);
        Ok(out)
    }

    /// Copy with rows reordered by `order` (a permutation of `0..len`).
    pub fn permuted(&self, order: &[usize]) -> DataSet {
        let mut out = DataSet::empty(self.dim);
        for &i in order {
            out.responses.push(self.responses[i]);
            out.features.extend_from_slice(self.features(i));
        }
        out
    }

    /// Copy with every feature vector extended by one trailing coordinate.
    pub fn with_extra_coordinate(&self, extra: &[f64]) -> Result<DataSet> {
        if extra.len() != self.len() {
            return Err(Error::Argument("one extra coordinate per row required".into()));
        }
        let mut out = DataSet::empty(self.dim + 1);
        for (i, &u) in extra.iter().enumerate() {
            out.responses.push(self.responses[i]);
            out.features.extend_from_slice(self.features(i));
            out.features.push(u);
        }
        Ok(out)
    }

    /// Sample standard deviation of the responses (0 for fewer than two rows).
    pub fn response_sd(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let mean = crate::numeric::exact_mean(&self.responses).unwrap_or(0.0);
        let ss = crate::numeric::exact_sum(self.responses.iter().map(|y| (y - mean) * (y - mean)));
        (ss / (n - 1) as f64).sqrt()
    }
}

/// A value of the extended real line `[-inf, +inf]`.
///
/// Backed by an `f64` that is never NaN, so the IEEE ordering already is the
/// extended-real order and `y <= +inf` holds while `y <= -inf` fails for
/// every finite `y`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ExtendedReal(f64);

impl ExtendedReal {
    pub const NEG_INFINITY: ExtendedReal = ExtendedReal(f64::NEG_INFINITY);
    pub const INFINITY: ExtendedReal = ExtendedReal(f64::INFINITY);
    pub const ZERO: ExtendedReal = ExtendedReal(0.0);

    /// Panics on NaN.
    pub fn new(value: f64) -> Self {
        assert!(!value.is_nan(), "ExtendedReal cannot hold NaN");
        ExtendedReal(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn finite(self) -> Option<f64> {
        self.0.is_finite().then_some(self.0)
    }

    /// `self + delta` for finite `delta`; infinities absorb the shift.
    pub fn shifted(self, delta: f64) -> Self {
        debug_assert!(delta.is_finite());
        if self.0.is_finite() {
            ExtendedReal(self.0 + delta)
        } else {
            self
        }
    }

    /// `value <= self` under the extended-real conventions.
    pub fn admits(self, value: f64) -> bool {
        value <= self.0
    }
}

impl Eq for ExtendedReal {}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl From<ExtendedReal> for f64 {
    fn from(v: ExtendedReal) -> f64 {
        v.0
    }
}

impl TryFrom<f64> for ExtendedReal {
    type Error = String;
    fn try_from(v: f64) -> std::result::Result<Self, String> {
        if v.is_nan() {
            Err("NaN is not an extended real".into())
        } else {
            Ok(ExtendedReal(v))
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::INFINITY {
            write!(f, "+inf")
        } else if self.0 == f64::NEG_INFINITY {
            write!(f, "-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Seed plus stream id. The same pair always reproduces the same draws,
/// independent of how many worker threads consume other streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Independent child stream, e.g. one per Monte Carlo replication.
    pub fn child(&self, index: u64) -> RngSeed {
        RngSeed {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(index.wrapping_add(0x5bd1_e995))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A source of i.i.d. `(response, features)` draws.
pub trait DataGenerator: Send + Sync {
    fn dim(&self) -> usize;

    /// One observation.
    fn draw(&self, rng: &mut dyn RngCore) -> Result<Observation>;

    /// `n + 1` i.i.d. draws; the first `n` form the training set.
    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Result<(DataSet, Observation)> {
        let mut data = DataSet::empty(self.dim());
        for _ in 0..n {
            let obs = self.draw(rng)?;
            data.push(obs.response, &obs.features)?;
        }
        let new = self.draw(rng)?;
        Ok((data, new))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn small() -> DataSet {
        DataSet::from_rows(1, &[1.0, 2.0, 3.0], &[vec![10.0], vec![20.0], vec![30.0]]).unwrap()
    }

    #[test]
    fn removal_and_append() {
        let d = small();
        let r = d.without(1);
        assert_eq!(r.len(), 2);
        assert_eq!(r.responses(), &[1.0, 3.0]);
        assert_eq!(r.features(1), &[30.0]);
        let a = d.with_appended(4.0, &[40.0]).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a.features(3), &[40.0]);
        assert!(d.with_appended(4.0, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn rejects_non_finite_response() {
        let mut d = DataSet::empty(1);
        assert!(d.push(f64::NAN, &[0.0]).is_err());
        assert!(d.push(f64::INFINITY, &[0.0]).is_err());
    }

    #[test]
    fn extended_real_order_and_conventions() {
        let q = ExtendedReal::new(1.5);
        assert!(ExtendedReal::NEG_INFINITY < q && q < ExtendedReal::INFINITY);
        assert!(ExtendedReal::INFINITY.admits(1e300));
        assert!(!ExtendedReal::NEG_INFINITY.admits(-1e300));
        assert_eq!(ExtendedReal::INFINITY.shifted(-5.0), ExtendedReal::INFINITY);
        assert_eq!(q.shifted(0.5).value(), 2.0);
        assert!(ExtendedReal::try_from(f64::NAN).is_err());
    }

    #[test]
    fn seed_reproduces_and_streams_differ() {
        let s = RngSeed::with_stream(7, 3);
        let a: Vec<u64> = (0..4).map(|_| s.rng().random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut r1 = s.child(0).rng();
        let mut r2 = s.child(1).rng();
        assert_ne!(r1.random::<u64>(), r2.random::<u64>());
    }
}
