//! Deterministic property suites over random instances: the gauge bound of
//! §7.2, the sandwich of §7.3, the Lévy gauge properties (Lemma C.2),
//! the quantile inequality (Prop. C.4) and the squared-distance dominance
//! (Lemma C.10).
//!
//! Random step functions use dyadic breakpoints (multiples of 1/8) and
//! dyadic tolerances so that translations and rescalings by powers of two
//! are exact; comparisons that combine separately rounded gauge values use
//! [`ROUNDING_SLACK`].

use std::time::Instant;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::ecdf::{build_ecdf, StepFunction};
use crate::error::Result;
use crate::interval::GridSpec;
use crate::levy::{
    check_quantile_inequality, gauge_upper_bounds, levy_gauge, levy_metric, METRIC_ACCURACY, ROUNDING_SLACK,
};
use crate::model::{DataSet, RngSeed};
use crate::parallel::map_indexed;
use crate::predictors::Predictor;
use crate::scores::ConformityScore;
use crate::sets::{check_gauge_hat_bound, sandwich_report};

use super::report::{Check, ExperimentReport, Table};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaConfig {
    /// Random instances per suite.
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// Grid points per sandwich instance.
    #[serde(default = "default_sandwich_points")]
    pub sandwich_grid_points: usize,
}

fn default_reps() -> usize {
    1000
}

fn default_sandwich_points() -> usize {
    101
}

impl Default for LemmaConfig {
    fn default() -> Self {
        Self {
            reps: default_reps(),
            sandwich_grid_points: default_sandwich_points(),
        }
    }
}

/// Result of checking one instance: `None` when the property holds,
/// otherwise a description of the counterexample.
type Outcome = Result<Option<String>>;

fn dyadic(rng: &mut dyn RngCore, lo: i32, hi: i32) -> f64 {
    rng.random_range(lo..=hi) as f64 / 8.0
}

/// ECDF of 1–12 values on the 1/8 lattice in [-3, 3] (ties are common).
fn random_ecdf(rng: &mut dyn RngCore) -> StepFunction {
    let m = rng.random_range(1..=12);
    let values: Vec<f64> = (0..m).map(|_| dyadic(rng, -24, 24)).collect();
    build_ecdf(&values).expect("nonempty finite")
}

/// Nonnegative tolerance on the 1/8 lattice in [0, 2].
fn random_delta(rng: &mut dyn RngCore) -> f64 {
    dyadic(rng, 0, 16)
}

/// Evaluation points where `A(t) − B(t + δ)` can change value.
fn candidates(f: &StepFunction, g: &StepFunction, delta: f64) -> Vec<f64> {
    let mut ts = Vec::new();
    for &b in f.breakpoints().iter().chain(g.breakpoints()) {
        ts.extend([b, b - delta, b + delta]);
    }
    ts
}

/// Direct evaluation of `sup_t max(F(t) − G(t+δ), G(t) − F(t+δ))`, clamped.
fn gauge_by_definition(f: &StepFunction, g: &StepFunction, delta: f64) -> f64 {
    candidates(f, g, delta)
        .into_iter()
        .map(|t| (f.eval(t) - g.eval(t + delta)).max(g.eval(t) - f.eval(t + delta)))
        .fold(0.0, f64::max)
        .clamp(0.0, 1.0)
}

fn sup_norm(f: &StepFunction, g: &StepFunction) -> f64 {
    candidates(f, g, 0.0)
        .into_iter()
        .map(|t| (f.eval(t) - g.eval(t)).abs())
        .fold(0.0, f64::max)
}

fn gauge(f: &StepFunction, g: &StepFunction, delta: f64) -> Result<f64> {
    Ok(levy_gauge(f, g, delta)?.epsilon)
}

fn lemma_attained(rng: &mut dyn RngCore) -> Outcome {
    let (f, g, d) = (random_ecdf(rng), random_ecdf(rng), random_delta(rng));
    let ld = gauge(&f, &g, d)?;
    for t in candidates(&f, &g, d) {
        for s in [t, t + d, t - d] {
            let gt = g.eval(s);
            if f.eval(s - d) - ld > gt + ROUNDING_SLACK || gt > f.eval(s + d) + ld + ROUNDING_SLACK {
                return Ok(Some(format!("bracket fails at t={s}, delta={d}, ld={ld}")));
            }
        }
    }
    Ok(None)
}

fn lemma_symmetry(rng: &mut dyn RngCore) -> Outcome {
    let (f, g, d) = (random_ecdf(rng), random_ecdf(rng), random_delta(rng));
    let (a, b) = (gauge(&f, &g, d)?, gauge(&g, &f, d)?);
    Ok((a != b).then(|| format!("ld(F,G)={a} != ld(G,F)={b} at delta={d}")))
}

fn lemma_monotone(rng: &mut dyn RngCore) -> Outcome {
    let (f, g) = (random_ecdf(rng), random_ecdf(rng));
    let (mut d1, mut d2) = (random_delta(rng), random_delta(rng));
    if d1 > d2 {
        std::mem::swap(&mut d1, &mut d2);
    }
    let (a, b) = (gauge(&f, &g, d1)?, gauge(&f, &g, d2)?);
    if b > a {
        return Ok(Some(format!("ld at {d2} = {b} exceeds ld at {d1} = {a}")));
    }
    let zero = gauge(&f, &g, 0.0)?;
    let sup = sup_norm(&f, &g);
    if zero != sup || !(0.0..=1.0).contains(&a) {
        return Ok(Some(format!("ld_0 = {zero}, sup-norm = {sup}, ld = {a}")));
    }
    let right = gauge(&f, &g, d1 + 2f64.powi(-20))?;
    if right != a {
        return Ok(Some(format!("not right-continuous at {d1}: {a} vs {right}")));
    }
    Ok(None)
}

fn lemma_alternative(rng: &mut dyn RngCore) -> Outcome {
    let (f, g, d) = (random_ecdf(rng), random_ecdf(rng), random_delta(rng));
    let (a, b) = (gauge(&f, &g, d)?, gauge_by_definition(&f, &g, d));
    Ok((a != b).then(|| format!("gauge {a} != direct evaluation {b} at delta={d}")))
}

fn lemma_triangle(rng: &mut dyn RngCore) -> Outcome {
    let (f, g, h) = (random_ecdf(rng), random_ecdf(rng), random_ecdf(rng));
    let (d, e) = (random_delta(rng), random_delta(rng));
    let lhs = gauge(&f, &h, d + e)?;
    let rhs = gauge(&f, &g, d)? + gauge(&g, &h, e)?;
    Ok((lhs > rhs + ROUNDING_SLACK).then(|| format!("ld_(d+e)(F,H)={lhs} > {rhs} (d={d}, e={e})")))
}

fn lemma_levy(rng: &mut dyn RngCore) -> Outcome {
    let (f, g) = (random_ecdf(rng), random_ecdf(rng));
    // tolerances around the metric's natural range [0, 1]
    let d = rng.random_range(0..=12) as f64 / 8.0;
    let ld = gauge(&f, &g, d)?;
    let l = levy_metric(&f, &g);
    // `levy_metric` returns a feasible value within METRIC_ACCURACY above L
    let ok = d.min(ld) <= l + ROUNDING_SLACK && l <= d.max(ld) + METRIC_ACCURACY;
    Ok((!ok).then(|| format!("L={l}, delta={d}, ld={ld}")))
}

fn lemma_scaling(rng: &mut dyn RngCore) -> Outcome {
    let (f, g, d) = (random_ecdf(rng), random_ecdf(rng), random_delta(rng));
    let c = 2f64.powi(rng.random_range(-3..=3));
    let a = gauge(&f, &g, d)?;
    let b = gauge(&f.rescaled(c)?, &g.rescaled(c)?, d / c)?;
    Ok((a != b).then(|| format!("ld_d(F,G)={a} != ld_(d/c)(F(c.),G(c.))={b} (c={c}, d={d})")))
}

fn prop_quantile(rng: &mut dyn RngCore) -> Outcome {
    let (f, g, d) = (random_ecdf(rng), random_ecdf(rng), random_delta(rng));
    let alpha = if rng.random_bool(0.5) {
        rng.random_range(-8..=40) as f64 / 32.0
    } else {
        rng.random_range(-0.2..1.2)
    };
    Ok((!check_quantile_inequality(&f, &g, d, alpha)?).then(|| format!("alpha={alpha}, delta={d}")))
}

fn lemma_c10(rng: &mut dyn RngCore) -> Outcome {
    let (f, g) = (random_ecdf(rng), random_ecdf(rng));
    let d = dyadic(rng, 1, 16);
    let k = dyadic(rng, 0, 32);
    let mu = dyadic(rng, -16, 16);
    let ld = gauge(&f, &g, d)?;
    let (windowed, global) = gauge_upper_bounds(&f, &g, d, k, mu)?;
    let ok = ld <= windowed + ROUNDING_SLACK && ld <= global + ROUNDING_SLACK;
    Ok((!ok).then(|| format!("ld={ld}, windowed={windowed}, global={global} (delta={d}, K={k}, mu={mu})")))
}

/// Small random regression instance with a random score from a mixed pool.
fn random_instance(rng: &mut dyn RngCore) -> Result<(ConformityScore, DataSet, Vec<f64>, f64)> {
    let n = rng.random_range(3..=14);
    let p = rng.random_range(1..=2);
    let scale = [0.5, 1.0, 3.0][rng.random_range(0..3)];
    let mut data = DataSet::empty(p);
    for _ in 0..n {
        let x: Vec<f64> = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y = x[0] + scale * rng.random_range(-1.0..1.0);
        data.push(y, &x)?;
    }
    let x_new: Vec<f64> = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
    let y = rng.random_range(-3.0 * scale..3.0 * scale);
    let score = match rng.random_range(0..9) {
        0 => ConformityScore::out_sample(Predictor::mean_only()),
        1 => ConformityScore::out_sample(Predictor::constant_zero()),
        2 => ConformityScore::out_sample(Predictor::ridge(0.5)?),
        3 => ConformityScore::out_sample(Predictor::ols()),
        4 => ConformityScore::out_sample(Predictor::knn(2)?),
        5 => ConformityScore::in_sample(Predictor::ridge(1.0)?),
        6 => ConformityScore::in_sample(Predictor::ols()),
        7 => ConformityScore::in_sample(Predictor::knn(2)?),
        _ => ConformityScore::in_sample(Predictor::mean_only()),
    };
    Ok((score, data, x_new, y))
}

fn gauge_hat(rng: &mut dyn RngCore) -> Outcome {
    let (score, data, x, y) = random_instance(rng)?;
    let delta = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..1.0) };
    Ok((!check_gauge_hat_bound(&score, &data, &x, y, delta)?)
        .then(|| format!("{} n={} y={y} delta={delta}", score.label(), data.len())))
}

fn sandwich(rng: &mut dyn RngCore, points: usize) -> Outcome {
    let (score, data, x, _) = random_instance(rng)?;
    let alpha = rng.random_range(0.05..0.6);
    let eps = rng.random_range(0.01..0.3);
    let delta1 = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..0.3) };
    let delta2 = rng.random_range(0.01..0.5);
    let center = crate::stats::mean(data.responses());
    let s = data.response_sd().max(0.1);
    let grid = GridSpec::with_points(center - 5.0 * s, center + 5.0 * s, points)?;
    let report = sandwich_report(&score, &data, &x, alpha, eps, delta1, delta2, &grid)?;
    Ok((!report.holds()).then(|| {
        format!(
            "{} n={} alpha={alpha} eps={eps} d1={delta1} d2={delta2}: {report:?}",
            score.label(),
            data.len()
        )
    }))
}

/// Runs every suite on `config.reps` random instances each.
pub fn run_lemma_suites(config: &LemmaConfig, seed: RngSeed) -> Result<ExperimentReport> {
    let start = Instant::now();
    if config.reps == 0 || config.sandwich_grid_points < 2 {
        return Err(crate::error::Error::Config("reps must be positive and the sandwich grid needs 2 points".into()));
    }
    let points = config.sandwich_grid_points;
    type Suite<'a> = (&'static str, Box<dyn Fn(&mut dyn RngCore) -> Outcome + Send + Sync + 'a>);
    let suites: Vec<Suite> = vec![
        ("gauge_hat_bound", Box::new(gauge_hat)),
        ("sandwich", Box::new(move |rng| sandwich(rng, points))),
        ("ld_infimum_attained", Box::new(lemma_attained)),
        ("ld_symmetry", Box::new(lemma_symmetry)),
        ("ld_monotone_continuous", Box::new(lemma_monotone)),
        ("ld_alternative_definition", Box::new(lemma_alternative)),
        ("ld_triangle", Box::new(lemma_triangle)),
        ("ld_levy_connection", Box::new(lemma_levy)),
        ("ld_scaling", Box::new(lemma_scaling)),
        ("quantile_inequality", Box::new(prop_quantile)),
        ("c10_dominance", Box::new(lemma_c10)),
    ];
    let mut report = ExperimentReport::new("check-lemmas", seed.seed, serde_json::to_value(config)?);
    let mut table = Table::new("lemmas", &["suite", "instances", "failures"]);
    for (s, (name, check)) in suites.iter().enumerate() {
        let suite_seed = seed.child(s as u64);
        let outcomes = map_indexed(config.reps, |i| {
            let mut rng = suite_seed.child(i as u64).rng();
            check(&mut rng)
        })?;
        let failures: Vec<&String> = outcomes.iter().flatten().collect();
        table.push(vec![(*name).into(), config.reps.into(), failures.len().into()]);
        let detail = match failures.first() {
            Some(first) => format!("{} of {} instances fail; first: {first}", failures.len(), config.reps),
            None => format!("{} instances", config.reps),
        };
        report.add_check(Check::new(*name, failures.is_empty(), detail));
    }
    report.tables.push(table);
    report.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok(report)
}
