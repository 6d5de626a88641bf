//! Symmetric point-prediction algorithms, affine coefficients for the
//! no-refit shortcut, the Appendix A wrappers B and Ã, and out-of-sample
//! instability estimation.

use std::cmp::Ordering;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DataGenerator, DataSet, RngSeed};
use crate::numeric::exact_sum;
use crate::parallel::map_indexed;
use crate::stats::{summarize, SampleSummary};

/// Fit-and-predict callback for externally supplied models: given the query
/// features and a training set, return the point prediction. The callback
/// must be symmetric in the training set for the conformal guarantees.
pub type BlackboxFn = dyn Fn(&[f64], &DataSet) -> Result<f64> + Send + Sync;

/// Named in-process model callback.
#[derive(Clone)]
pub struct Blackbox {
    pub name: String,
    pub callback: Arc<BlackboxFn>,
}

impl fmt::Debug for Blackbox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Blackbox({})", self.name)
    }
}

/// The prediction rule.
#[derive(Debug, Clone)]
pub enum PredictorKind {
    /// Least squares with intercept; minimum-norm solution when singular.
    Ols,
    /// Ridge regression with intercept; `penalize_intercept = false` leaves
    /// the intercept unpenalized.
    Ridge { lambda: f64, penalize_intercept: bool },
    /// Average of the `k` nearest training responses (Euclidean distance,
    /// ties broken by the lowest training index).
    Knn { k: usize },
    ConstantZero,
    MeanOnly,
    Blackbox(Blackbox),
    /// Algorithm B of Appendix A built on the inner predictor.
    InSampleConsistent(Box<Predictor>),
    /// Algorithm Ã of Appendix A built on the inner predictor.
    OutSampleConsistent(Box<Predictor>),
}

/// A symmetric prediction algorithm plus its refit ledger.
///
/// Clones share the ledger, so a predictor handed to several scores or
/// worker threads still reports the total number of fits.
#[derive(Debug, Clone)]
pub struct Predictor {
    kind: PredictorKind,
    refits: Arc<AtomicU64>,
}

impl Predictor {
    pub fn new(kind: PredictorKind) -> Result<Self> {
        match &kind {
            PredictorKind::Ridge { lambda, .. } if !(*lambda >= 0.0 && lambda.is_finite()) => {
                return Err(Error::Argument(format!("ridge penalty {lambda} must be finite and nonnegative")))
            }
            PredictorKind::Knn { k: 0 } => return Err(Error::Argument("knn needs k >= 1".into())),
            _ => {}
        }
        Ok(Self {
            kind,
            refits: Arc::new(AtomicU64::new(0)),
        })
    }

    pub fn ols() -> Self {
        Self::new(PredictorKind::Ols).expect("valid")
    }

    pub fn ridge(lambda: f64) -> Result<Self> {
        Self::new(PredictorKind::Ridge {
            lambda,
            penalize_intercept: false,
        })
    }

    pub fn knn(k: usize) -> Result<Self> {
        Self::new(PredictorKind::Knn { k })
    }

    pub fn constant_zero() -> Self {
        Self::new(PredictorKind::ConstantZero).expect("valid")
    }

    pub fn mean_only() -> Self {
        Self::new(PredictorKind::MeanOnly).expect("valid")
    }

    pub fn blackbox<F>(name: impl Into<String>, callback: F) -> Self
    where
        F: Fn(&[f64], &DataSet) -> Result<f64> + Send + Sync + 'static,
    {
        Self::new(PredictorKind::Blackbox(Blackbox {
            name: name.into(),
            callback: Arc::new(callback),
        }))
        .expect("valid")
    }

    pub fn kind(&self) -> &PredictorKind {
        &self.kind
    }

    /// Number of training-set evaluations so far (shared between clones).
    pub fn refits(&self) -> u64 {
        self.refits.load(AtomicOrdering::Relaxed)
    }

    /// Same rule with an independent ledger starting at zero.
    pub fn with_fresh_ledger(&self) -> Predictor {
        Predictor {
            kind: self.kind.clone(),
            refits: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Records `count` logical fits performed by an algebraic fast path.
    pub(crate) fn record_refits(&self, count: u64) {
        self.refits.fetch_add(count, AtomicOrdering::Relaxed);
    }

    /// Short human-readable label, e.g. `ridge(1)`.
    pub fn label(&self) -> String {
        match &self.kind {
            PredictorKind::Ols => "ols".into(),
            PredictorKind::Ridge { lambda, .. } => format!("ridge({lambda})"),
            PredictorKind::Knn { k } => format!("knn({k})"),
            PredictorKind::ConstantZero => "zero".into(),
            PredictorKind::MeanOnly => "mean".into(),
            PredictorKind::Blackbox(b) => format!("blackbox({})", b.name),
            PredictorKind::InSampleConsistent(inner) => format!("B[{}]", inner.label()),
            PredictorKind::OutSampleConsistent(inner) => format!("Ã[{}]", inner.label()),
        }
    }

    /// Whether the prediction is an affine function of the training
    /// responses for fixed features (so [`affine_coefficients`] applies).
    pub fn is_affine(&self) -> bool {
        match &self.kind {
            PredictorKind::Ols | PredictorKind::Ridge { .. } | PredictorKind::ConstantZero | PredictorKind::MeanOnly => true,
            PredictorKind::InSampleConsistent(inner) | PredictorKind::OutSampleConsistent(inner) => inner.is_affine(),
            PredictorKind::Knn { .. } | PredictorKind::Blackbox(_) => false,
        }
    }

    /// Point prediction `A(x, T)`; counts one fit.
    pub fn predict(&self, x: &[f64], data: &DataSet) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::Argument("cannot train on an empty dataset".into()));
        }
        if x.len() != data.dim() {
            return Err(Error::Argument(format!(
                "query has dimension {} but training features have dimension {}",
                x.len(),
                data.dim()
            )));
        }
        self.refits.fetch_add(1, AtomicOrdering::Relaxed);
        match &self.kind {
            PredictorKind::Ols => linear_predict(x, data, 0.0, false),
            PredictorKind::Ridge {
                lambda,
                penalize_intercept,
            } => linear_predict(x, data, *lambda, *penalize_intercept),
            PredictorKind::Knn { k } => knn_predict(*k, x, data),
            PredictorKind::ConstantZero => Ok(0.0),
            PredictorKind::MeanOnly => Ok(exact_sum(data.responses().iter().copied()) / data.len() as f64),
            PredictorKind::Blackbox(b) => {
                let value = (b.callback)(x, data)?;
                if value.is_finite() {
                    Ok(value)
                } else {
                    Err(Error::Callback(format!("{} returned {value}", b.name)))
                }
            }
            PredictorKind::InSampleConsistent(inner) => {
                let matches = matching_rows(x, data);
                if matches.is_empty() {
                    inner.predict(x, data)
                } else {
                    let values = matches
                        .iter()
                        .map(|&i| inner.predict(x, &data.without(i)))
                        .collect::<Result<Vec<f64>>>()?;
                    Ok(exact_sum(values.iter().copied()) / values.len() as f64)
                }
            }
            PredictorKind::OutSampleConsistent(inner) => {
                if matching_rows(x, data).is_empty() {
                    let values = (0..data.len())
                        .map(|i| inner.predict(data.features(i), data))
                        .collect::<Result<Vec<f64>>>()?;
                    Ok(exact_sum(values.iter().copied()) / values.len() as f64)
                } else {
                    // every matching row has the same features, so the average
                    // over matches is the prediction itself
                    inner.predict(x, data)
                }
            }
        }
    }
}

/// Rows whose features equal `x` bit for bit.
fn matching_rows(x: &[f64], data: &DataSet) -> Vec<usize> {
    (0..data.len())
        .filter(|&i| {
            data.features(i)
                .iter()
                .zip(x)
                .all(|(a, b)| a.to_bits() == b.to_bits())
        })
        .collect()
}

/// Row order used by the linear fits: lexicographic in the features, then by
/// response. Fitting in a canonical order makes the floating point result
/// independent of the storage order.
fn canonical_order(data: &DataSet) -> Vec<usize> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&i, &j| {
        for (a, b) in data.features(i).iter().zip(data.features(j)) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        data.response(i).total_cmp(&data.response(j))
    });
    order
}

fn linear_predict(x: &[f64], data: &DataSet, lambda: f64, penalize_intercept: bool) -> Result<f64> {
    let beta = linear_fit(data, lambda, penalize_intercept)?;
    let mut pred = beta[0];
    for (j, xj) in x.iter().enumerate() {
        pred += beta[j + 1] * xj;
    }
    Ok(pred)
}

/// Coefficients `(intercept, slopes…)` of the (ridge-)penalized least-squares
/// fit.
pub fn linear_fit(data: &DataSet, lambda: f64, penalize_intercept: bool) -> Result<DVector<f64>> {
    let n = data.len();
    let p = data.dim() + 1;
    let order = canonical_order(data);
    let design = DMatrix::from_fn(n, p, |r, c| if c == 0 { 1.0 } else { data.features(order[r])[c - 1] });
    let y = DVector::from_fn(n, |r, _| data.response(order[r]));
    if lambda > 0.0 {
        let mut gram = design.transpose() * &design;
        for j in 0..p {
            if j > 0 || penalize_intercept {
                gram[(j, j)] += lambda;
            }
        }
        let rhs = design.transpose() * &y;
        if let Some(chol) = gram.clone().cholesky() {
            return Ok(chol.solve(&rhs));
        }
        return min_norm_solve(gram, &rhs);
    }
    min_norm_solve(design, &y)
}

/// Minimum-norm least-squares solution via the SVD pseudo-inverse.
fn min_norm_solve(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (rows, cols) = a.shape();
    let svd = a.svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = rows.max(cols) as f64 * f64::EPSILON * sigma_max;
    svd.solve(b, tol)
        .map_err(|e| Error::Argument(format!("least-squares solve failed: {e}")))
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Indices of the `k` nearest rows to `x`, ordered by (distance, index).
pub fn nearest_neighbors(k: usize, x: &[f64], data: &DataSet) -> Result<Vec<usize>> {
    if k == 0 || k > data.len() {
        return Err(Error::Argument(format!("k = {k} must lie in 1..={}", data.len())));
    }
    let mut dist: Vec<(f64, usize)> = (0..data.len()).map(|i| (squared_distance(x, data.features(i)), i)).collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < dist.len() {
        dist.select_nth_unstable_by(k - 1, cmp);
        dist.truncate(k);
    }
    dist.sort_by(cmp);
    Ok(dist.into_iter().map(|(_, i)| i).collect())
}

fn knn_predict(k: usize, x: &[f64], data: &DataSet) -> Result<f64> {
    let idx = nearest_neighbors(k, x, data)?;
    Ok(exact_sum(idx.iter().map(|&i| data.response(i))) / k as f64)
}

/// `C^in((y, x), T) = |y·a − b|` for affine predictors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineCoefficients {
    pub a: f64,
    pub b: f64,
}

/// Affine coefficients of the in-sample residual at `x_new`, from two
/// augmented fits (responses 0 and 1 for the new point):
/// `a = 1 − (A(x, D¹) − A(x, D⁰))`, `b = A(x, D⁰)`.
pub fn affine_coefficients(p: &Predictor, x_new: &[f64], data: &DataSet) -> Result<AffineCoefficients> {
    if !p.is_affine() {
        return Err(Error::Unsupported(format!(
            "{} is not affine in the responses; closed-form coefficients need ols, ridge, mean or zero",
            p.label()
        )));
    }
    let a0 = p.predict(x_new, &data.with_appended(0.0, x_new)?)?;
    let a1 = p.predict(x_new, &data.with_appended(1.0, x_new)?)?;
    Ok(AffineCoefficients { a: 1.0 - (a1 - a0), b: a0 })
}

/// Algorithm B: in-sample predictions equal the base algorithm's
/// leave-one-out predictions.
pub fn make_in_sample_consistent(a: &Predictor) -> Predictor {
    Predictor::new(PredictorKind::InSampleConsistent(Box::new(a.clone()))).expect("valid")
}

/// Algorithm Ã: fresh queries receive the average in-sample prediction.
pub fn make_out_sample_consistent(a: &Predictor) -> Predictor {
    Predictor::new(PredictorKind::OutSampleConsistent(Box::new(a.clone()))).expect("valid")
}

/// Appends one uniform(0,1) coordinate to every feature vector.
pub fn augment_unique_id(data: &DataSet, seed: RngSeed) -> Result<DataSet> {
    let mut rng = seed.rng();
    let extra: Vec<f64> = (0..data.len()).map(|_| rng.random::<f64>()).collect();
    data.with_extra_coordinate(&extra)
}

/// Training set and query point augmented together: the query receives the
/// draw following the training rows' draws on the same stream.
pub fn augment_unique_id_with_query(data: &DataSet, x_new: &[f64], seed: RngSeed) -> Result<(DataSet, Vec<f64>)> {
    let mut rng = seed.rng();
    let extra: Vec<f64> = (0..data.len()).map(|_| rng.random::<f64>()).collect();
    let mut x = x_new.to_vec();
    x.push(rng.random::<f64>());
    Ok((data.with_extra_coordinate(&extra)?, x))
}

/// Monte Carlo summary of `|A(x_{n+1}, T_n) − A(x_{n+1}, T_n \ t_n)|`.
pub fn estimate_oos_instability(
    a: &Predictor,
    generator: &dyn DataGenerator,
    n: usize,
    reps: usize,
    seed: RngSeed,
) -> Result<SampleSummary> {
    if reps == 0 {
        return Err(Error::Argument("reps must be at least 1".into()));
    }
    if n < 2 {
        return Err(Error::Argument("instability needs n >= 2".into()));
    }
    let stats = map_indexed(reps, |r| {
        let mut rng = seed.child(r as u64).rng();
        let (data, new) = generator.sample(n, &mut rng)?;
        let full = a.predict(&new.features, &data)?;
        let reduced = a.predict(&new.features, &data.without(n - 1))?;
        Ok((full - reduced).abs())
    })?;
    Ok(summarize(&stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Observation;
    use proptest::prelude::{prop_assert_eq, proptest, ProptestConfig};
    use rand::seq::SliceRandom;

    fn random_data(n: usize, p: usize, seed: u64) -> DataSet {
        let mut rng = RngSeed::new(seed).rng();
        let mut data = DataSet::empty(p);
        for _ in 0..n {
            let x: Vec<f64> = (0..p).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let y = x.iter().sum::<f64>() + rng.random::<f64>();
            data.push(y, &x).unwrap();
        }
        data
    }

    fn all_kinds() -> Vec<Predictor> {
        vec![
            Predictor::ols(),
            Predictor::ridge(0.5).unwrap(),
            Predictor::knn(3).unwrap(),
            Predictor::constant_zero(),
            Predictor::mean_only(),
        ]
    }

    #[test]
    fn predict_examples() {
        let data = DataSet::from_rows(1, &[1.0, 3.0], &[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(Predictor::constant_zero().predict(&[5.0], &data).unwrap(), 0.0);
        assert_eq!(Predictor::mean_only().predict(&[5.0], &data).unwrap(), 2.0);
        assert_eq!(Predictor::knn(1).unwrap().predict(&[1.0], &data).unwrap(), 3.0);
        assert!(Predictor::knn(3).unwrap().predict(&[1.0], &data).is_err());
        assert!(Predictor::mean_only().predict(&[1.0, 2.0], &data).is_err());
        assert!(Predictor::mean_only().predict(&[1.0], &DataSet::empty(1)).is_err());
        assert!(Predictor::ridge(-1.0).is_err());
        assert!(Predictor::knn(0).is_err());
        // exact line through two points
        let line = Predictor::ols().predict(&[2.0], &data).unwrap();
        assert!((line - 5.0).abs() < 1e-12);
    }

    #[test]
    fn ols_handles_singular_designs() {
        // p >= n: minimum-norm interpolation still returns a finite value
        let data = random_data(3, 6, 1);
        let pred = Predictor::ols().predict(data.features(0), &data).unwrap();
        assert!((pred - data.response(0)).abs() < 1e-8);
        // duplicated feature column
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, i as f64]).collect();
        let dup = DataSet::from_rows(2, &[0.0, 1.0, 2.0, 3.0, 4.0], &rows).unwrap();
        assert!((Predictor::ols().predict(&[5.0, 5.0], &dup).unwrap() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn refit_counter_is_exact_and_shared() {
        let data = random_data(10, 2, 2);
        let p = Predictor::ridge(1.0).unwrap();
        let clone = p.clone();
        for _ in 0..7 {
            clone.predict(&[0.0, 0.0], &data).unwrap();
        }
        assert_eq!(p.refits(), 7);
        assert_eq!(p.with_fresh_ledger().refits(), 0);
    }

    #[test]
    fn affine_examples() {
        let data = DataSet::from_rows(1, &[1.0, 3.0], &[vec![0.0], vec![1.0]]).unwrap();
        let z = affine_coefficients(&Predictor::constant_zero(), &[0.5], &data).unwrap();
        assert_eq!((z.a, z.b), (1.0, 0.0));
        let m = affine_coefficients(&Predictor::mean_only(), &[0.5], &data).unwrap();
        assert!((m.a - 2.0 / 3.0).abs() < 1e-15 && (m.b - 4.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            affine_coefficients(&Predictor::knn(1).unwrap(), &[0.5], &data),
            Err(Error::Unsupported(_))
        ));
        // large penalty with a free intercept approaches the intercept-only model
        let big = random_data(12, 2, 3);
        let r = affine_coefficients(&Predictor::ridge(1e8).unwrap(), &[0.3, -0.2], &big).unwrap();
        let mo = affine_coefficients(&Predictor::mean_only(), &[0.3, -0.2], &big).unwrap();
        assert!((r.a - mo.a).abs() < 1e-6 && (r.b - mo.b).abs() < 1e-6);
        let shrink = Predictor::new(PredictorKind::Ridge {
            lambda: 1e12,
            penalize_intercept: true,
        })
        .unwrap();
        let s = affine_coefficients(&shrink, &[0.3, -0.2], &big).unwrap();
        assert!((s.a - 1.0).abs() < 1e-6 && s.b.abs() < 1e-6);
    }

    #[test]
    fn affine_identity_pointwise() {
        let mut rng = RngSeed::new(9).rng();
        for (seed, p) in [Predictor::ols(), Predictor::ridge(2.0).unwrap(), Predictor::mean_only()]
            .into_iter()
            .enumerate()
        {
            let data = random_data(15, 3, 10 + seed as u64);
            let x = [0.1, -0.4, 0.7];
            let c = affine_coefficients(&p, &x, &data).unwrap();
            for _ in 0..20 {
                let y: f64 = rng.random::<f64>() * 20.0 - 10.0;
                let fit = p.predict(&x, &data.with_appended(y, &x).unwrap()).unwrap();
                assert!(((y * c.a - c.b).abs() - (y - fit).abs()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn algorithm_b_examples() {
        let data = random_data(8, 2, 4);
        for base in [Predictor::ols(), Predictor::knn(1).unwrap(), Predictor::mean_only()] {
            let b = make_in_sample_consistent(&base);
            for i in 0..data.len() {
                let expect = base.predict(data.features(i), &data.without(i)).unwrap();
                assert_eq!(b.predict(data.features(i), &data).unwrap(), expect);
            }
            let fresh = [9.0, 9.0];
            assert_eq!(b.predict(&fresh, &data).unwrap(), base.predict(&fresh, &data).unwrap());
        }
        // knn(1) base: B(x_1, T) is the nearest neighbour of x_1 among T \ 1
        let b = make_in_sample_consistent(&Predictor::knn(1).unwrap());
        let rest = data.without(0);
        let nn = nearest_neighbors(1, data.features(0), &rest).unwrap()[0];
        assert_eq!(b.predict(data.features(0), &data).unwrap(), rest.response(nn));
    }

    #[test]
    fn algorithm_b_leave_one_out_identity() {
        let base = Predictor::ridge(1.0).unwrap();
        let b = make_in_sample_consistent(&base);
        let data = random_data(10, 2, 5);
        let x_new = [0.25, 0.5];
        assert_eq!(b.predict(&x_new, &data).unwrap(), base.predict(&x_new, &data).unwrap());
        for i in 0..data.len() {
            let loo = data.without(i);
            assert_eq!(
                b.predict(data.features(i), &loo).unwrap(),
                base.predict(data.features(i), &loo).unwrap()
            );
        }
    }

    #[test]
    fn algorithm_a_tilde_examples() {
        let data = random_data(6, 2, 6);
        let base = Predictor::ridge(0.3).unwrap();
        let at = make_out_sample_consistent(&base);
        assert_eq!(
            at.predict(data.features(1), &data).unwrap(),
            base.predict(data.features(1), &data).unwrap()
        );
        assert_eq!(make_out_sample_consistent(&Predictor::constant_zero()).predict(&[7.0, 7.0], &data).unwrap(), 0.0);
        let mut hand = 0.0;
        for i in 0..data.len() {
            hand += base.predict(data.features(i), &data).unwrap();
        }
        hand /= data.len() as f64;
        assert!((at.predict(&[7.0, 7.0], &data).unwrap() - hand).abs() < 1e-12);
    }

    #[test]
    fn unique_id_augmentation() {
        let rows = vec![vec![1.0, 2.0], vec![1.0, 2.0]];
        let data = DataSet::from_rows(2, &[0.0, 0.0], &rows).unwrap();
        let a = augment_unique_id(&data, RngSeed::new(3)).unwrap();
        assert_eq!(a.dim(), 3);
        assert_ne!(a.features(0), a.features(1));
        assert_eq!(a, augment_unique_id(&data, RngSeed::new(3)).unwrap());
        let (aq, x) = augment_unique_id_with_query(&data, &[1.0, 2.0], RngSeed::new(3)).unwrap();
        assert_eq!(aq, a);
        assert_eq!(x.len(), 3);
    }

    struct Noise;
    impl DataGenerator for Noise {
        fn dim(&self) -> usize {
            1
        }
        fn draw(&self, rng: &mut dyn rand::RngCore) -> Result<Observation> {
            let x: f64 = rng.random();
            let y: f64 = rng.random::<f64>() * 2.0 - 1.0;
            Ok(Observation::new(y, vec![x]))
        }
    }

    #[test]
    fn oos_instability_examples() {
        let zero = estimate_oos_instability(&Predictor::constant_zero(), &Noise, 50, 50, RngSeed::new(1)).unwrap();
        assert_eq!(zero.mean, 0.0);
        let mean = estimate_oos_instability(&Predictor::mean_only(), &Noise, 50, 200, RngSeed::new(1)).unwrap();
        assert!(mean.mean > 0.0 && mean.mean < 0.05, "{mean:?}");
        // knn with k = |T| averages every response, i.e. it is mean_only
        // (the deletion statistic itself needs k <= n-1, see the ledger)
        let mut rng = RngSeed::new(2).rng();
        let (data, new) = Noise.sample(50, &mut rng).unwrap();
        assert_eq!(
            Predictor::knn(50).unwrap().predict(&new.features, &data).unwrap(),
            Predictor::mean_only().predict(&new.features, &data).unwrap()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn permutation_symmetry(seed in 0u64..10_000) {
            let data = random_data(12, 2, seed);
            let mut order: Vec<usize> = (0..data.len()).collect();
            order.shuffle(&mut RngSeed::new(seed ^ 77).rng());
            let shuffled = data.permuted(&order);
            let x = [0.3, -1.1];
            for p in all_kinds() {
                let a = p.predict(&x, &data).unwrap();
                let b = p.predict(&x, &shuffled).unwrap();
                prop_assert_eq!(a, b, "{}", p.label());
            }
        }
    }
}
