//! Textual score/method specifications and per-training-set membership
//! oracles used by the Monte Carlo experiments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ecdf::build_ecdf;
use crate::error::{Error, Result};
use crate::interval::{GridSpec, IntervalUnion};
use crate::model::{DataSet, ExtendedReal};
use crate::predictors::{make_in_sample_consistent, make_out_sample_consistent, Predictor};
use crate::scores::{ConformityScore, ScoreKind};
use crate::sets::{
    cross_conformal_set, full_conformal_contains, full_conformal_set, jackknife_plus_symmetric, jackknife_symmetric,
    shortcut_closed_form, shortcut_quantile, shortcut_set, shortcut_unimodal, threshold, ConformalConfig,
    CrossConformal,
};

/// Parses a predictor spec: `ols`, `ridge[:λ]`, `knn:k`, `mean`, `zero`,
/// `b:<spec>` (in-sample-consistent B of Lemma A) or `atilde:<spec>`
/// (out-of-sample-consistent Ã).
pub fn parse_predictor(text: &str) -> Result<Predictor> {
    let text = text.trim();
    let (head, rest) = match text.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (text, None),
    };
    let bad = || Error::Config(format!("unknown predictor '{text}' (expected ols, ridge:λ, knn:k, mean, zero, b:…, atilde:…)"));
    let number = |r: Option<&str>| -> Result<f64> {
        r.ok_or_else(bad)?
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad numeric parameter in '{text}'")))
    };
    match head {
        "ols" if rest.is_none() => Ok(Predictor::ols()),
        "ridge" => Predictor::ridge(if rest.is_some() { number(rest)? } else { 1.0 }),
        "knn" => {
            let k = rest
                .ok_or_else(bad)?
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad k in '{text}'")))?;
            Predictor::knn(k)
        }
        "mean" | "mean_only" if rest.is_none() => Ok(Predictor::mean_only()),
        "zero" | "constant_zero" if rest.is_none() => Ok(Predictor::constant_zero()),
        "b" => Ok(make_in_sample_consistent(&parse_predictor(rest.ok_or_else(bad)?)?)),
        "atilde" => Ok(make_out_sample_consistent(&parse_predictor(rest.ok_or_else(bad)?)?)),
        _ => Err(bad()),
    }
}

/// Parses `in-sample:<predictor>` or `out-sample:<predictor>`.
pub fn parse_score(text: &str) -> Result<ConformityScore> {
    let (side, pred) = text
        .trim()
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("score '{text}' must look like out-sample:<predictor>")))?;
    let p = parse_predictor(pred)?;
    match side {
        "in-sample" | "in" => Ok(ConformityScore::in_sample(p)),
        "out-sample" | "out" => Ok(ConformityScore::out_sample(p)),
        _ => Err(Error::Config(format!("score side '{side}' must be in-sample or out-sample"))),
    }
}

/// Prediction-set constructions selectable from configs and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Grid-realized full conformal set.
    Full,
    /// Grid-realized shortcut set.
    Shortcut,
    /// Closed-form shortcut (affine, kNN and out-of-sample scores).
    ShortcutExact,
    /// Grid-realized n-fold cross-conformal set.
    Cross,
    /// Symmetrized Jackknife of the score's predictor.
    Jackknife,
    /// Symmetric Jackknife+ of the score's predictor.
    JackknifePlus,
    /// Algorithm 3 (bisection and golden-section search).
    Unimodal,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Full,
        Method::Shortcut,
        Method::ShortcutExact,
        Method::Cross,
        Method::Jackknife,
        Method::JackknifePlus,
        Method::Unimodal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Full => "full",
            Method::Shortcut => "shortcut",
            Method::ShortcutExact => "shortcut-exact",
            Method::Cross => "cross",
            Method::Jackknife => "jackknife",
            Method::JackknifePlus => "jackknife-plus",
            Method::Unimodal => "unimodal",
        }
    }

    /// Short label used in method-pair names (`fc`, `sc`, ...).
    pub fn abbreviation(self) -> &'static str {
        match self {
            Method::Full => "fc",
            Method::Shortcut => "sc",
            Method::ShortcutExact => "sc-exact",
            Method::Cross => "cc",
            Method::Jackknife => "jk",
            Method::JackknifePlus => "jk-plus",
            Method::Unimodal => "unimodal",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s || m.abbreviation() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::Config(format!("unknown method '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

/// Realization options for grid-based and bisection-based methods.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SetOptions {
    /// Grid; defaults to `ŷ ± 10·s` with 4001 points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// Algorithm 3 tolerance (default `2^-20`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Algorithm 3 search radius exponent (default: smallest `K` with
    /// `2^K ≥ |ŷ| + 20·s`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<i32>,
}

/// A computed prediction set plus the refit count when relevant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutput {
    pub method: Method,
    pub score: String,
    pub alpha: f64,
    pub delta: f64,
    pub set: IntervalUnion,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refits: Option<u64>,
}

fn predictor_of(score: &ConformityScore, method: Method) -> Result<&Predictor> {
    score
        .predictor()
        .ok_or_else(|| Error::Unsupported(format!("{method} needs a model-backed score, got {}", score.label())))
}

/// `ŷ` (the score's point prediction, or the response mean) and `s`.
fn center_and_scale(score: &ConformityScore, data: &DataSet, x_new: &[f64]) -> Result<(f64, f64)> {
    let center = match score.predictor() {
        Some(p) => p.predict(x_new, data)?,
        None => Predictor::mean_only().predict(x_new, data)?,
    };
    let s = data.response_sd();
    Ok((center, if s > 0.0 && s.is_finite() { s } else { 1.0 }))
}

/// Builds the prediction set of `method` at `x_new`.
pub fn prediction_set(
    method: Method,
    score: &ConformityScore,
    data: &DataSet,
    x_new: &[f64],
    alpha: f64,
    delta: f64,
    options: &SetOptions,
) -> Result<MethodOutput> {
    if x_new.len() != data.dim() {
        return Err(Error::Config(format!(
            "query point has {} features, dataset has {}",
            x_new.len(),
            data.dim()
        )));
    }
    let (center, scale) = center_and_scale(score, data, x_new)?;
    let grid = match options.grid {
        Some(g) => {
            g.validate()?;
            g
        }
        None => GridSpec::around(center, scale)?,
    };
    let cfg = ConformalConfig::new(alpha, delta, grid);
    let mut used_grid = Some(grid);
    let mut refits = None;
    let set = match method {
        Method::Full => full_conformal_set(score, data, x_new, &cfg)?,
        Method::Shortcut => shortcut_set(score, data, x_new, &cfg)?,
        Method::Cross => cross_conformal_set(score, data, x_new, &cfg)?,
        Method::ShortcutExact => {
            used_grid = None;
            shortcut_closed_form(score, data, x_new, alpha, delta)?
        }
        Method::Jackknife => {
            used_grid = None;
            jackknife_symmetric(predictor_of(score, method)?, data, x_new, alpha, delta)?
        }
        Method::JackknifePlus => {
            used_grid = None;
            jackknife_plus_symmetric(predictor_of(score, method)?, data, x_new, alpha, delta)?
        }
        Method::Unimodal => {
            used_grid = None;
            let k = options
                .k
                .unwrap_or_else(|| ((center.abs() + 20.0 * scale).max(1.0)).log2().ceil() as i32);
            let eps = options.eps.unwrap_or(2f64.powi(-20));
            let report = shortcut_unimodal(score, data, x_new, alpha, delta, eps, k)?;
            refits = Some(report.refits);
            report.interval
        }
    };
    Ok(MethodOutput {
        method,
        score: score.label(),
        alpha,
        delta,
        set,
        grid: used_grid,
        refits,
    })
}

/// Exact per-training-set membership test `y ∈ PS(x)` for a method, with
/// everything that depends only on the training set computed once.
pub enum MembershipOracle<'a> {
    Full {
        score: &'a ConformityScore,
        data: &'a DataSet,
        alpha: f64,
        delta: f64,
    },
    /// Shortcut sets (grid, closed form and Algorithm 3 all realize it).
    Shortcut {
        score: &'a ConformityScore,
        data: &'a DataSet,
        bound: ExtendedReal,
    },
    Cross {
        score: &'a ConformityScore,
        data: &'a DataSet,
        reference: Vec<f64>,
        alpha: f64,
        delta: f64,
    },
    Jackknife {
        predictor: &'a Predictor,
        data: &'a DataSet,
        bound: ExtendedReal,
    },
    JackknifePlus {
        predictor: &'a Predictor,
        data: &'a DataSet,
        alpha: f64,
        delta: f64,
    },
}

impl<'a> MembershipOracle<'a> {
    pub fn new(
        method: Method,
        score: &'a ConformityScore,
        data: &'a DataSet,
        alpha: f64,
        delta: f64,
    ) -> Result<Self> {
        Ok(match method {
            Method::Full => MembershipOracle::Full { score, data, alpha, delta },
            Method::Shortcut | Method::ShortcutExact | Method::Unimodal => MembershipOracle::Shortcut {
                score,
                data,
                bound: threshold(shortcut_quantile(score, data, alpha)?, delta),
            },
            Method::Cross => MembershipOracle::Cross {
                score,
                data,
                reference: score.loo_scores(data)?,
                alpha,
                delta,
            },
            Method::Jackknife => {
                let predictor = predictor_of(score, method)?;
                let residuals = ConformityScore::out_sample(predictor.clone()).loo_scores(data)?;
                MembershipOracle::Jackknife {
                    predictor,
                    data,
                    bound: threshold(build_ecdf(&residuals)?.quantile(1.0 - alpha), delta),
                }
            }
            Method::JackknifePlus => MembershipOracle::JackknifePlus {
                predictor: predictor_of(score, method)?,
                data,
                alpha,
                delta,
            },
        })
    }

    /// The prediction set at `x_new` in closed form, when available without
    /// refitting per candidate (shortcut of out-of-sample scores and the
    /// symmetrized Jackknife: `A(x, T) ± bound`).
    pub fn set_at(&self, x_new: &[f64]) -> Result<Option<IntervalUnion>> {
        let (predictor, data, bound) = match self {
            MembershipOracle::Shortcut { score, data, bound } => match score.kind() {
                ScoreKind::OutSample(p) => (p, *data, *bound),
                _ => return Ok(None),
            },
            MembershipOracle::Jackknife { predictor, data, bound } => (*predictor, *data, *bound),
            _ => return Ok(None),
        };
        let r = bound.value();
        if r < 0.0 {
            return Ok(Some(IntervalUnion::empty()));
        }
        if r == f64::INFINITY {
            return Ok(Some(IntervalUnion::real_line()));
        }
        let center = predictor.predict(x_new, data)?;
        Ok(Some(IntervalUnion::single(crate::interval::Interval::closed(center - r, center + r))))
    }

    pub fn contains(&self, x_new: &[f64], y: f64) -> Result<bool> {
        match self {
            MembershipOracle::Full { score, data, alpha, delta } => {
                full_conformal_contains(score, data, x_new, y, *alpha, *delta)
            }
            MembershipOracle::Shortcut { score, data, bound } => Ok(bound.admits(score.score(y, x_new, data)?)),
            MembershipOracle::Cross {
                score,
                data,
                reference,
                alpha,
                delta,
            } => CrossConformal::with_reference(score, data, x_new, reference.clone())?.contains(y, *alpha, *delta),
            MembershipOracle::Jackknife { predictor, data, bound } => {
                Ok(bound.admits((y - predictor.predict(x_new, data)?).abs()))
            }
            MembershipOracle::JackknifePlus {
                predictor,
                data,
                alpha,
                delta,
            } => Ok(jackknife_plus_symmetric(predictor, data, x_new, *alpha, *delta)?.contains(y)),
        }
    }
}

/// True when the score is an out-of-sample score (shortcut = Jackknife).
pub fn is_out_sample(score: &ConformityScore) -> bool {
    matches!(score.kind(), ScoreKind::OutSample(_))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;

    #[test]
    fn parsing() {
        assert_eq!(parse_score("out-sample:mean").unwrap().label(), ConformityScore::out_sample(Predictor::mean_only()).label());
        assert!(parse_score("in-sample:ridge:0.5").is_ok());
        assert!(parse_score("in-sample:knn:3").is_ok());
        assert!(parse_score("out:b:ols").is_ok());
        assert!(parse_score("sideways:ols").is_err());
        assert!(parse_score("out-sample:ridge:-1").is_err());
        assert!(parse_score("mean").is_err());
        assert_eq!("shortcut".parse::<Method>().unwrap(), Method::Shortcut);
        assert_eq!("fc".parse::<Method>().unwrap(), Method::Full);
        assert!("magic".parse::<Method>().is_err());
        assert_eq!(serde_json::to_string(&Method::JackknifePlus).unwrap(), "\"jackknife-plus\"");
    }

    fn data() -> DataSet {
        let ys = [1.3, -2.1, 3.7, 0.4, 2.2, -0.9, 0.8];
        let rows: Vec<Vec<f64>> = (0..ys.len()).map(|i| vec![i as f64 * 0.3]).collect();
        DataSet::from_rows(1, &ys, &rows).unwrap()
    }

    #[test]
    fn methods_agree_on_out_sample_mean() {
        let t = data();
        let c = parse_score("out-sample:mean").unwrap();
        let opts = SetOptions::default();
        let exact = prediction_set(Method::ShortcutExact, &c, &t, &[0.5], 0.2, 0.0, &opts).unwrap().set;
        let jk = prediction_set(Method::Jackknife, &c, &t, &[0.5], 0.2, 0.0, &opts).unwrap().set;
        assert_eq!(exact, jk);
        let uni = prediction_set(Method::Unimodal, &c, &t, &[0.5], 0.2, 0.0, &opts).unwrap();
        let (lo, hi) = (exact.intervals()[0].lower.value(), exact.intervals()[0].upper.value());
        let u = uni.set.intervals()[0];
        assert!(u.lower.value() <= lo && u.upper.value() >= hi && u.upper.value() - hi <= 2f64.powi(-19));
        assert!(uni.refits.unwrap() > 0);
        let grid = prediction_set(Method::Shortcut, &c, &t, &[0.5], 0.2, 0.0, &opts).unwrap();
        let h = grid.grid.unwrap().step;
        let g = grid.set.intervals()[0];
        assert!((g.lower.value() - lo).abs() <= h && (g.upper.value() - hi).abs() <= h);
        for m in Method::ALL {
            let out = prediction_set(m, &c, &t, &[0.5], 0.2, 0.0, &opts).unwrap();
            assert!(!out.set.is_empty(), "{m}");
        }
        assert!(prediction_set(Method::Full, &c, &t, &[0.5, 1.0], 0.2, 0.0, &opts).is_err());
    }

    #[test]
    fn oracles_match_sets() {
        let t = data();
        let c = parse_score("out-sample:ridge:1").unwrap();
        let grid = GridSpec::with_points(-8.0, 8.0, 161).unwrap();
        let opts = SetOptions { grid: Some(grid), ..Default::default() };
        for m in [Method::Full, Method::Shortcut, Method::Cross, Method::Jackknife, Method::JackknifePlus] {
            let set = prediction_set(m, &c, &t, &[0.4], 0.25, 0.05, &opts).unwrap().set;
            let oracle = MembershipOracle::new(m, &c, &t, 0.25, 0.05).unwrap();
            for y in grid.points() {
                assert_eq!(oracle.contains(&[0.4], y).unwrap(), set.contains(y), "{m} at {y}");
            }
        }
        // closed-form sets agree with pointwise membership
        for m in [Method::Shortcut, Method::Jackknife] {
            let oracle = MembershipOracle::new(m, &c, &t, 0.25, 0.05).unwrap();
            let set = oracle.set_at(&[0.4]).unwrap().unwrap();
            assert_eq!(set.intervals().len(), 1);
            for y in grid.points() {
                assert_eq!(oracle.contains(&[0.4], y).unwrap(), set.contains(y));
            }
        }
        assert!(MembershipOracle::new(Method::Full, &c, &t, 0.25, 0.05).unwrap().set_at(&[0.4]).unwrap().is_none());
        let _ = Interval::closed(0.0, 1.0);
    }
}
