//! δ-inflated n-fold cross-conformal prediction sets (§5.1).

use crate::error::{Error, Result};
use crate::interval::IntervalUnion;
use crate::model::DataSet;
use crate::scores::{ConformityScore, ScoreKind};

use super::{grid_set, ConformalConfig};

/// Precomputed leave-one-out state: the reference scores `C(t_i, T \ i)` and,
/// for out-of-sample scores, the leave-one-out predictions at `x_new`.
pub struct CrossConformal<'a> {
    score: &'a ConformityScore,
    data: &'a DataSet,
    x_new: &'a [f64],
    reference: Vec<f64>,
    loo_centers: Option<Vec<f64>>,
}

impl<'a> CrossConformal<'a> {
    pub fn new(score: &'a ConformityScore, data: &'a DataSet, x_new: &'a [f64]) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::Argument("cross-conformal sets need n >= 2".into()));
        }
        let reference = score.loo_scores(data)?;
        Self::with_reference(score, data, x_new, reference)
    }

    /// Reuses reference scores `C(t_i, T \ i)` computed once per training set.
    pub fn with_reference(
        score: &'a ConformityScore,
        data: &'a DataSet,
        x_new: &'a [f64],
        reference: Vec<f64>,
    ) -> Result<Self> {
        if reference.len() != data.len() || data.len() < 2 {
            return Err(Error::Argument("reference scores must match the training set (n >= 2)".into()));
        }
        let loo_centers = match score.kind() {
            ScoreKind::OutSample(p) => Some(
                (0..data.len())
                    .map(|i| p.predict(x_new, &data.without(i)))
                    .collect::<Result<Vec<f64>>>()?,
            ),
            _ => None,
        };
        Ok(Self {
            score,
            data,
            x_new,
            reference,
            loo_centers,
        })
    }

    /// `C(t_i, T \ i)`.
    pub fn reference_scores(&self) -> &[f64] {
        &self.reference
    }

    /// `C((y, x_new), T \ i)` for every `i`.
    pub fn candidate_scores(&self, y: f64) -> Result<Vec<f64>> {
        match &self.loo_centers {
            Some(centers) => Ok(centers.iter().map(|c| (y - c).abs()).collect()),
            None => (0..self.data.len())
                .map(|i| self.score.score(y, self.x_new, &self.data.without(i)))
                .collect(),
        }
    }

    /// `1 + #{i : C((y,x), T\i) ≤ C(t_i, T\i) + δ} > α(n+1)` given the
    /// candidate scores.
    pub fn accepts(&self, candidate: &[f64], alpha: f64, delta: f64) -> bool {
        let n = self.reference.len();
        let hits = candidate
            .iter()
            .zip(&self.reference)
            .filter(|(c, r)| **c <= **r + delta)
            .count();
        (1 + hits) as f64 > alpha * (n + 1) as f64
    }

    pub fn contains(&self, y: f64, alpha: f64, delta: f64) -> Result<bool> {
        Ok(self.accepts(&self.candidate_scores(y)?, alpha, delta))
    }
}

/// Exact cross-conformal membership of a single candidate.
pub fn cross_conformal_contains(
    c: &ConformityScore,
    data: &DataSet,
    x_new: &[f64],
    y: f64,
    alpha: f64,
    delta: f64,
) -> Result<bool> {
    CrossConformal::new(c, data, x_new)?.contains(y, alpha, delta)
}

/// Grid realization of the δ-inflated n-fold cross-conformal set.
pub fn cross_conformal_set(c: &ConformityScore, data: &DataSet, x_new: &[f64], cfg: &ConformalConfig) -> Result<IntervalUnion> {
    let cc = CrossConformal::new(c, data, x_new)?;
    grid_set(&cfg.grid, |y| cc.contains(y, cfg.alpha, cfg.delta))
}
