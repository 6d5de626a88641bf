//! Conformity scores `C^in`, `C^out` and custom scores, leave-one-out score
//! vectors, and the stability-coefficient estimator.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DataGenerator, DataSet, Observation, RngSeed};
use crate::numeric::ExactAccumulator;
use crate::parallel::map_indexed;
use crate::predictors::{Predictor, PredictorKind};
use crate::stats::{exceed_fraction, summarize, SampleSummary};

/// Custom score callback `(y, x, T) -> score`; must be symmetric in `T`.
pub type CustomScoreFn = dyn Fn(f64, &[f64], &DataSet) -> Result<f64> + Send + Sync;

#[derive(Clone)]
pub enum ScoreKind {
    /// `|y − A(x, T ∪ {(y, x)})|`
    InSample(Predictor),
    /// `|y − A(x, T)|`
    OutSample(Predictor),
    Custom { name: String, callback: Arc<CustomScoreFn> },
}

impl fmt::Debug for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreKind::InSample(p) => write!(f, "InSample({})", p.label()),
            ScoreKind::OutSample(p) => write!(f, "OutSample({})", p.label()),
            ScoreKind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// A conformity score plus the flag telling Algorithm 3 that
/// `y ↦ C((y, x), T)` is unimodal.
#[derive(Debug, Clone)]
pub struct ConformityScore {
    kind: ScoreKind,
    unimodal_hint: bool,
}

/// Scores entering the augmented ECDF `F̂_y`: the candidate's score and the
/// `n` scores `C(t_i, D^y \ t_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedScores {
    pub candidate: f64,
    pub others: Vec<f64>,
}

impl AugmentedScores {
    /// All `n + 1` values, candidate last.
    pub fn all(&self) -> Vec<f64> {
        let mut v = self.others.clone();
        v.push(self.candidate);
        v
    }
}

impl ConformityScore {
    pub fn in_sample(p: Predictor) -> Self {
        // |y·a − b| for affine rules and (k−1)/k·|y − c| for kNN are unimodal
        let unimodal_hint = !matches!(p.kind(), PredictorKind::Blackbox(_));
        Self {
            kind: ScoreKind::InSample(p),
            unimodal_hint,
        }
    }

    pub fn out_sample(p: Predictor) -> Self {
        // |y − A(x, T)| is a V in y for every rule
        Self {
            kind: ScoreKind::OutSample(p),
            unimodal_hint: true,
        }
    }

    pub fn custom<F>(name: impl Into<String>, callback: F, unimodal_hint: bool) -> Self
    where
        F: Fn(f64, &[f64], &DataSet) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            kind: ScoreKind::Custom {
                name: name.into(),
                callback: Arc::new(callback),
            },
            unimodal_hint,
        }
    }

    pub fn with_unimodal_hint(mut self, hint: bool) -> Self {
        self.unimodal_hint = hint;
        self
    }

    pub fn kind(&self) -> &ScoreKind {
        &self.kind
    }

    pub fn unimodal_hint(&self) -> bool {
        self.unimodal_hint
    }

    /// The underlying predictor for model-backed scores.
    pub fn predictor(&self) -> Option<&Predictor> {
        match &self.kind {
            ScoreKind::InSample(p) | ScoreKind::OutSample(p) => Some(p),
            ScoreKind::Custom { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            ScoreKind::InSample(p) => format!("in-sample:{}", p.label()),
            ScoreKind::OutSample(p) => format!("out-sample:{}", p.label()),
            ScoreKind::Custom { name, .. } => format!("custom:{name}"),
        }
    }

    /// `C((y, x), T)`.
    pub fn score(&self, y: f64, x: &[f64], data: &DataSet) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::Argument("scores need a nonempty training set".into()));
        }
        match &self.kind {
            ScoreKind::InSample(p) => Ok((y - p.predict(x, &data.with_appended(y, x)?)?).abs()),
            ScoreKind::OutSample(p) => Ok((y - p.predict(x, data)?).abs()),
            ScoreKind::Custom { name, callback } => {
                let s = callback(y, x, data)?;
                if s.is_nan() {
                    Err(Error::Callback(format!("score {name} returned NaN")))
                } else {
                    Ok(s)
                }
            }
        }
    }

    pub fn score_observation(&self, t: &Observation, data: &DataSet) -> Result<f64> {
        self.score(t.response, &t.features, data)
    }

    /// `C(t_i, T \ t_i)` for every `i`.
    pub fn loo_scores(&self, data: &DataSet) -> Result<Vec<f64>> {
        if data.len() < 2 {
            return Err(Error::Argument("leave-one-out scores need at least two observations".into()));
        }
        (0..data.len())
            .map(|i| self.score(data.response(i), data.features(i), &data.without(i)))
            .collect()
    }

    /// The `n + 1` scores of the augmented ECDF at candidate `y`.
    ///
    /// For `out_sample(mean_only)` and `out_sample(constant_zero)` the leave-one
    /// -out means are obtained from one exact accumulator; the values are
    /// bitwise equal to the refitting path and the ledger still records the
    /// `n + 1` logical fits.
    pub fn augmented_scores(&self, data: &DataSet, x: &[f64], y: f64) -> Result<AugmentedScores> {
        let n = data.len();
        if n == 0 {
            return Err(Error::Argument("the augmented ECDF needs n >= 1".into()));
        }
        if let ScoreKind::OutSample(p) = &self.kind {
            if x.len() != data.dim() {
                return Err(Error::Argument("query dimension mismatch".into()));
            }
            match p.kind() {
                PredictorKind::MeanOnly => {
                    let mut acc = ExactAccumulator::new();
                    data.responses().iter().for_each(|&v| acc.add(v));
                    let candidate = (y - acc.value() / n as f64).abs();
                    acc.add(y);
                    let others = data
                        .responses()
                        .iter()
                        .map(|&yi| {
                            let mut loo = acc.clone();
                            loo.add(-yi);
                            (yi - loo.value() / n as f64).abs()
                        })
                        .collect();
                    p.record_refits(n as u64 + 1);
                    return Ok(AugmentedScores { candidate, others });
                }
                PredictorKind::ConstantZero => {
                    p.record_refits(n as u64 + 1);
                    return Ok(AugmentedScores {
                        candidate: y.abs(),
                        others: data.responses().iter().map(|v| v.abs()).collect(),
                    });
                }
                _ => {}
            }
        }
        let candidate = self.score(y, x, data)?;
        let augmented = data.with_appended(y, x)?;
        let others = (0..n)
            .map(|i| self.score(data.response(i), data.features(i), &augmented.without(i)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(AugmentedScores { candidate, others })
    }

    /// `y ↦ C((y, x), T)` with the fit hoisted out when the score allows it
    /// (out-of-sample scores fit once; everything else refits per call).
    pub fn candidate_scorer<'a>(&'a self, x: &'a [f64], data: &'a DataSet) -> Result<CandidateScorer<'a>> {
        match &self.kind {
            ScoreKind::OutSample(p) => Ok(CandidateScorer::Center(p.predict(x, data)?)),
            _ => Ok(CandidateScorer::Refit { score: self, x, data }),
        }
    }
}

/// Candidate-score evaluator returned by [`ConformityScore::candidate_scorer`].
pub enum CandidateScorer<'a> {
    /// `|y − center|`
    Center(f64),
    Refit {
        score: &'a ConformityScore,
        x: &'a [f64],
        data: &'a DataSet,
    },
}

impl CandidateScorer<'_> {
    pub fn eval(&self, y: f64) -> Result<f64> {
        match self {
            CandidateScorer::Center(c) => Ok((y - c).abs()),
            CandidateScorer::Refit { score, x, data } => score.score(y, x, data),
        }
    }
}

/// Deletion- and swap-form instability of a score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreInstability {
    pub delta: f64,
    /// `|C(t_{n+1}, T_n) − C(t_{n+1}, T_n \ t_n)|`
    pub deletion: SampleSummary,
    pub deletion_exceed_prob: f64,
    /// `|C(t_{n+1}, T_n) − C(t_{n+1}, T_n with t_1 replaced by a fresh copy)|`
    pub swap: SampleSummary,
    pub swap_exceed_prob: f64,
}

/// Per-draw instability statistics `(deletion, swap)`.
pub fn instability_draw(
    c: &ConformityScore,
    generator: &dyn DataGenerator,
    n: usize,
    seed: RngSeed,
) -> Result<(f64, f64)> {
    let mut rng = seed.rng();
    let (data, new) = generator.sample(n, &mut rng)?;
    let replacement = generator.draw(&mut rng)?;
    let full = c.score_observation(&new, &data)?;
    let deleted = c.score_observation(&new, &data.without(n - 1))?;
    let swapped = c.score_observation(&new, &data.with_replaced(0, replacement.response, &replacement.features)?)?;
    Ok(((full - deleted).abs(), (full - swapped).abs()))
}

/// Monte Carlo estimate of the stability coefficient in both forms; the two
/// share one sampling loop (one draw of `(T_n, t_{n+1}, t_1')` per rep).
pub fn estimate_score_instability(
    c: &ConformityScore,
    generator: &dyn DataGenerator,
    n: usize,
    reps: usize,
    seed: RngSeed,
    delta: f64,
) -> Result<ScoreInstability> {
    if reps == 0 {
        return Err(Error::Argument("reps must be at least 1".into()));
    }
    if n < 2 {
        return Err(Error::Argument("instability needs n >= 2".into()));
    }
    let draws = map_indexed(reps, |r| instability_draw(c, generator, n, seed.child(r as u64)))?;
    let deletion: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let swap: Vec<f64> = draws.iter().map(|d| d.1).collect();
    Ok(ScoreInstability {
        delta,
        deletion: summarize(&deletion),
        deletion_exceed_prob: exceed_fraction(&deletion, delta),
        swap: summarize(&swap),
        swap_exceed_prob: exceed_fraction(&swap, delta),
    })
}
