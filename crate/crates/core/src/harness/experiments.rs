//! The Monte Carlo experiments of the harness. Every replication draws from
//! its own RNG stream `(seed, index)`, replications run on the worker pool
//! in index order, and all aggregation happens afterwards sequentially, so
//! reports are bit-for-bit identical for any thread count.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ecdf::build_ecdf;
use crate::error::{Error, Result};
use crate::interval::{difference_length, symmetric_difference_length, GridSpec, IntervalUnion};
use crate::model::{DataGenerator, DataSet, RngSeed};
use crate::parallel::map_indexed;
use crate::scores::ConformityScore;
use crate::sets::{refit_bound, shortcut_closed_form, shortcut_unimodal, threshold};
use crate::stats::{binomial_se, mean, std_error, summarize};

use super::generators::{GeneratorKind, GeneratorSpec};
use super::methods::{parse_score, prediction_set, MembershipOracle, Method, SetOptions};
use super::report::{Check, ExperimentReport, Table};

/// Experiment names accepted by `simulate`.
pub const EXPERIMENTS: [&str; 5] = ["marginal", "conditional", "equivalence", "finite-sample", "refit-benchmark"];

fn default_score() -> String {
    "out-sample:mean".into()
}

fn default_alpha() -> f64 {
    0.1
}

fn default_linear_gaussian(n: usize) -> GeneratorSpec {
    GeneratorSpec::new(GeneratorKind::linear_gaussian(2, 1.0, 1.0), n)
}

fn resolved_generator(spec: &GeneratorSpec) -> Result<GeneratorSpec> {
    spec.validate()?;
    Ok(GeneratorSpec {
        cc_density_bound: spec.resolved_cc_density_bound(),
        ..*spec
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() {
        return Err(Error::Config(format!("alpha must be finite, got {alpha}")));
    }
    Ok(())
}

fn config_echo<T: Serialize>(config: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(config)?)
}

fn fmt17(v: f64) -> String {
    super::report::format_float(v)
}

fn nonincreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}

// ---------------------------------------------------------------------------
// Marginal coverage

/// How α is chosen per training set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum AlphaRule {
    /// The configured α for every training set.
    #[default]
    Fixed,
    /// Data-dependent variant: `α(T) = clamp(α · s_T / reference_sd, min, max)`
    /// with `s_T` the sample sd of the training responses. No coverage
    /// guarantee is claimed for it; it is reported only.
    ResidualSpread { reference_sd: f64, min: f64, max: f64 },
}

impl AlphaRule {
    pub fn alpha_for(&self, alpha: f64, data: &DataSet) -> f64 {
        match *self {
            AlphaRule::Fixed => alpha,
            AlphaRule::ResidualSpread { reference_sd, min, max } => {
                (alpha * data.response_sd() / reference_sd).clamp(min, max)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            AlphaRule::Fixed => Ok(()),
            AlphaRule::ResidualSpread { reference_sd, min, max } => {
                if reference_sd > 0.0 && min <= max && min.is_finite() && max.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config("residual_spread needs reference_sd > 0 and min <= max".into()))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalConfig {
    #[serde(default = "marginal_generator")]
    pub generator: GeneratorSpec,
    #[serde(default = "marginal_method")]
    pub method: Method,
    #[serde(default = "default_score")]
    pub score: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "marginal_reps")]
    pub reps: usize,
    #[serde(default)]
    pub alpha_rule: AlphaRule,
}

fn marginal_generator() -> GeneratorSpec {
    default_linear_gaussian(30)
}

fn marginal_method() -> Method {
    Method::Full
}

fn marginal_reps() -> usize {
    2000
}

impl Default for MarginalConfig {
    fn default() -> Self {
        Self {
            generator: marginal_generator(),
            method: Method::Full,
            score: default_score(),
            alpha: 0.1,
            delta: 0.0,
            reps: 2000,
            alpha_rule: AlphaRule::Fixed,
        }
    }
}

/// Fraction of replications with `y_{n+1} ∈ PS(x_{n+1})`, with binomial SE.
/// Pass flag: coverage ≥ 1 − α − 3·SE, asserted for full conformal with
/// δ ≥ 0 and a fixed α only.
pub fn run_marginal_coverage(config: &MarginalConfig, seed: RngSeed) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut config = config.clone();
    config.generator = resolved_generator(&config.generator)?;
    check_alpha(config.alpha)?;
    config.alpha_rule.validate()?;
    if config.reps < 100 {
        return Err(Error::Config(format!("reps must be at least 100, got {}", config.reps)));
    }
    let score = parse_score(&config.score)?;
    let generator = config.generator;
    let outcomes = map_indexed(config.reps, |r| {
        let mut rng = seed.child(r as u64).rng();
        let (data, new) = generator.kind.sample(generator.n, &mut rng)?;
        let alpha = config.alpha_rule.alpha_for(config.alpha, &data);
        let oracle = MembershipOracle::new(config.method, &score, &data, alpha, config.delta)?;
        Ok((oracle.contains(&new.features, new.response)?, alpha))
    })?;
    let covered = outcomes.iter().filter(|o| o.0).count();
    let coverage = covered as f64 / config.reps as f64;
    let se = binomial_se(coverage, config.reps);
    let alphas: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
    let mean_alpha = mean(&alphas);

    let mut report = ExperimentReport::new("marginal", seed.seed, config_echo(&config)?);
    let mut table = Table::new(
        "coverage",
        &["method", "score", "n", "alpha", "mean_alpha", "delta", "reps", "coverage", "se"],
    );
    table.push(vec![
        config.method.name().into(),
        score.label().into(),
        generator.n.into(),
        config.alpha.into(),
        mean_alpha.into(),
        config.delta.into(),
        config.reps.into(),
        coverage.into(),
        se.into(),
    ]);
    report.tables.push(table);
    if config.method == Method::Full && config.delta >= 0.0 && config.alpha_rule == AlphaRule::Fixed {
        let target = 1.0 - config.alpha - 3.0 * se;
        report.add_check(Check::new(
            "marginal_conservative",
            coverage >= target,
            format!("coverage {} >= 1 - alpha - 3 SE = {}", fmt17(coverage), fmt17(target)),
        ));
    }
    report.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

// ---------------------------------------------------------------------------
// Conditional coverage

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalConfig {
    #[serde(default = "conditional_generator")]
    pub generator: GeneratorSpec,
    /// Sample-size sweep (overrides `generator.n`).
    #[serde(default = "conditional_ns")]
    pub ns: Vec<usize>,
    #[serde(default = "conditional_method")]
    pub method: Method,
    #[serde(default = "default_score")]
    pub score: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "conditional_delta")]
    pub delta: f64,
    #[serde(default = "mc_reps")]
    pub outer_reps: usize,
    #[serde(default = "mc_reps")]
    pub inner_reps: usize,
    /// Exceedance margins `ε` for the fraction of training sets with
    /// conditional miscoverage `> α + ε`.
    #[serde(default = "conditional_epsilons")]
    pub epsilons: Vec<f64>,
    /// Margin whose exceedance fraction is trend-checked.
    #[serde(default = "trend_epsilon")]
    pub trend_epsilon: f64,
    /// Upper limit for the exceedance fraction at the largest `n`.
    #[serde(default = "final_exceed_max")]
    pub final_exceed_max: Option<f64>,
    #[serde(default)]
    pub estimator: ConditionalEstimator,
}

/// How the inner Monte Carlo estimates `P(y ∉ PS | T_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionalEstimator {
    /// Conditional Monte Carlo when possible, plain Monte Carlo otherwise.
    #[default]
    Auto,
    /// Fraction of fresh `(x, y)` draws with `y ∉ PS(x)`.
    MonteCarlo,
    /// Average over fresh `x` of `P(y ∉ PS(x) | x)`, integrated exactly from
    /// the generator's conditional law (Rao–Blackwellized; unbiased for the
    /// same quantity with lower variance). Needs a closed-form set and a
    /// generator with a known conditional distribution.
    Conditional,
}

fn conditional_generator() -> GeneratorSpec {
    default_linear_gaussian(25)
}

fn conditional_ns() -> Vec<usize> {
    vec![25, 50, 100]
}

fn conditional_method() -> Method {
    Method::Shortcut
}

fn conditional_delta() -> f64 {
    0.1
}

fn mc_reps() -> usize {
    300
}

fn conditional_epsilons() -> Vec<f64> {
    vec![0.02, 0.05]
}

fn trend_epsilon() -> f64 {
    0.05
}

fn final_exceed_max() -> Option<f64> {
    Some(0.05)
}

impl Default for ConditionalConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

/// Whether the conditional (Rao–Blackwellized) estimator applies.
fn conditional_supported(method: Method, score: &ConformityScore, kind: &GeneratorKind) -> Result<bool> {
    let closed_form = match method {
        Method::Shortcut | Method::ShortcutExact | Method::Unimodal => super::methods::is_out_sample(score),
        Method::Jackknife => score.predictor().is_some(),
        _ => false,
    };
    let probe = vec![0.0; kind.dim()];
    Ok(closed_form && kind.conditional_cdf(&probe, 0.0).is_some())
}

/// Per-`n` statistics of the conditional miscoverage `P(y ∉ PS | T_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalCell {
    pub n: usize,
    pub mean_miscoverage: f64,
    pub se: f64,
    pub q95: f64,
    pub mean_abs_deviation: f64,
    pub exceed: Vec<(f64, f64)>,
}

/// Two-level Monte Carlo: outer draws of `T_n`, inner fresh `(x, y)`.
pub fn run_conditional_coverage(config: &ConditionalConfig, seed: RngSeed) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut config = config.clone();
    config.generator = resolved_generator(&config.generator)?;
    check_alpha(config.alpha)?;
    if config.outer_reps < 100 || config.inner_reps < 100 {
        return Err(Error::Config("outer_reps and inner_reps must both be at least 100".into()));
    }
    if config.ns.is_empty() || config.ns.iter().any(|&n| n < 2) {
        return Err(Error::Config("ns must be a nonempty list of sizes >= 2".into()));
    }
    let score = parse_score(&config.score)?;
    let kind = config.generator.kind;
    let conditional = conditional_supported(config.method, &score, &kind)?;
    config.estimator = match (config.estimator, conditional) {
        (ConditionalEstimator::MonteCarlo, _) => ConditionalEstimator::MonteCarlo,
        (_, true) => ConditionalEstimator::Conditional,
        (ConditionalEstimator::Auto, false) => ConditionalEstimator::MonteCarlo,
        (ConditionalEstimator::Conditional, false) => {
            return Err(Error::Config(
                "the conditional estimator needs a closed-form set (shortcut of an out-of-sample score or jackknife) and a generator with a known conditional law".into(),
            ))
        }
    };
    let conditional = config.estimator == ConditionalEstimator::Conditional;

    let mut cells = Vec::new();
    for (j, &n) in config.ns.iter().enumerate() {
        let level = seed.child(j as u64);
        let miscoverage = map_indexed(config.outer_reps, |r| {
            let rep = level.child(r as u64);
            let mut rng = rep.rng();
            let (data, _) = kind.sample(n, &mut rng)?;
            let oracle = MembershipOracle::new(config.method, &score, &data, config.alpha, config.delta)?;
            let mut inner = rep.child(u64::MAX).rng();
            let mut total = 0.0;
            for _ in 0..config.inner_reps {
                let t = kind.draw(&mut inner)?;
                total += if conditional {
                    let set = oracle.set_at(&t.features)?.expect("checked closed form");
                    1.0 - kind.conditional_probability(&t.features, &set).expect("checked conditional law")
                } else if oracle.contains(&t.features, t.response)? {
                    0.0
                } else {
                    1.0
                };
            }
            Ok(total / config.inner_reps as f64)
        })?;
        let summary = summarize(&miscoverage);
        let deviations: Vec<f64> = miscoverage.iter().map(|m| (m - config.alpha).abs()).collect();
        let exceed = config
            .epsilons
            .iter()
            .map(|&eps| {
                let count = miscoverage.iter().filter(|&&m| m > config.alpha + eps).count();
                (eps, count as f64 / miscoverage.len() as f64)
            })
            .collect();
        cells.push(ConditionalCell {
            n,
            mean_miscoverage: summary.mean,
            se: summary.se,
            q95: summary.q95,
            mean_abs_deviation: mean(&deviations),
            exceed,
        });
    }

    let mut report = ExperimentReport::new("conditional", seed.seed, config_echo(&config)?);
    let mut table = Table::new(
        "conditional",
        &[
            "n",
            "method",
            "mean_miscoverage",
            "se",
            "q95_miscoverage",
            "mean_abs_deviation",
            "epsilon",
            "exceed_fraction",
            "exceed_se",
        ],
    );
    for cell in &cells {
        for &(eps, frac) in &cell.exceed {
            table.push(vec![
                cell.n.into(),
                config.method.name().into(),
                cell.mean_miscoverage.into(),
                cell.se.into(),
                cell.q95.into(),
                cell.mean_abs_deviation.into(),
                eps.into(),
                frac.into(),
                binomial_se(frac, config.outer_reps).into(),
            ]);
        }
    }
    report.tables.push(table);

    let trend: Vec<f64> = cells
        .iter()
        .filter_map(|c| c.exceed.iter().find(|e| e.0 == config.trend_epsilon).map(|e| e.1))
        .collect();
    if trend.len() == cells.len() {
        let listed: Vec<String> = trend.iter().map(|v| fmt17(*v)).collect();
        report.add_check(Check::new(
            "exceed_nonincreasing",
            nonincreasing(&trend),
            format!("P(miscoverage > alpha + {}) across n: [{}]", config.trend_epsilon, listed.join(", ")),
        ));
        if let Some(limit) = config.final_exceed_max {
            let last = *trend.last().expect("nonempty");
            report.add_check(Check::new(
                "exceed_final",
                last <= limit,
                format!("{} at n = {} <= {}", fmt17(last), cells.last().expect("nonempty").n, limit),
            ));
        }
    }
    report.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

// ---------------------------------------------------------------------------
// Equivalence of the constructions

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectedSpec {
    /// `ε` in `PS^fc_α(δ₁) ∖ PS^sc_{α−ε}(δ₂)`.
    pub eps: f64,
    pub delta1: f64,
    pub delta2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceConfig {
    #[serde(default = "equivalence_generator")]
    pub generator: GeneratorSpec,
    #[serde(default = "equivalence_ns")]
    pub ns: Vec<usize>,
    #[serde(default = "default_score")]
    pub score: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "equivalence_pairs")]
    pub pairs: Vec<(Method, Method)>,
    #[serde(default = "equivalence_reps")]
    pub reps: usize,
    /// Grid over the bounded response range; defaults to the generator's
    /// support with 1001 points.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "equivalence_directed")]
    pub directed: Option<DirectedSpec>,
}

fn equivalence_generator() -> GeneratorSpec {
    GeneratorSpec::new(GeneratorKind::bounded_uniform(1), 20)
}

fn equivalence_ns() -> Vec<usize> {
    vec![20, 50, 100, 200]
}

fn equivalence_pairs() -> Vec<(Method, Method)> {
    vec![
        (Method::Full, Method::Shortcut),
        (Method::Full, Method::Cross),
        (Method::ShortcutExact, Method::Jackknife),
    ]
}

fn equivalence_reps() -> usize {
    200
}

fn equivalence_directed() -> Option<DirectedSpec> {
    Some(DirectedSpec {
        eps: 0.05,
        delta1: 0.0,
        delta2: 0.01,
    })
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

fn pair_name(pair: &(Method, Method)) -> String {
    format!("{}-{}", pair.0.abbreviation(), pair.1.abbreviation())
}

/// Mean symmetric-difference length between method pairs across an `n`
/// sweep, with every set intersected with the bounded response range.
pub fn run_equivalence(config: &EquivalenceConfig, seed: RngSeed) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut config = config.clone();
    config.generator = resolved_generator(&config.generator)?;
    check_alpha(config.alpha)?;
    let grid = match (config.grid, config.generator.kind.response_support()) {
        (Some(g), _) => {
            g.validate()?;
            g
        }
        (None, Some((lo, hi))) => GridSpec::with_points(lo, hi, 1001)?,
        (None, None) => {
            return Err(Error::Config(
                "the equivalence experiment needs a bounded response range: use bounded_uniform or set a grid".into(),
            ))
        }
    };
    config.grid = Some(grid);
    if config.reps == 0 || config.ns.is_empty() || config.ns.iter().any(|&n| n < 2) {
        return Err(Error::Config("reps must be positive and ns a nonempty list of sizes >= 2".into()));
    }
    if config.pairs.is_empty() {
        return Err(Error::Config("at least one method pair is required".into()));
    }
    let score = parse_score(&config.score)?;
    let kind = config.generator.kind;
    let mut methods: Vec<Method> = Vec::new();
    for (a, b) in &config.pairs {
        for m in [*a, *b] {
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
    }
    let options = SetOptions {
        grid: Some(grid),
        ..Default::default()
    };
    let clip = |set: IntervalUnion| set.clip(grid.lo, grid.hi);

    let mut report = ExperimentReport::new("equivalence", seed.seed, serde_json::Value::Null);
    let mut table = Table::new(
        "equivalence",
        &["n", "pair", "mean_symdiff", "se", "q95_symdiff", "max_symdiff", "reps"],
    );
    let mut directed_table = Table::new(
        "directed",
        &["n", "eps", "delta1", "delta2", "mean_difference", "se"],
    );
    let mut per_pair: Vec<Vec<f64>> = vec![Vec::new(); config.pairs.len()];
    for (j, &n) in config.ns.iter().enumerate() {
        let level = seed.child(j as u64);
        let draws = map_indexed(config.reps, |r| {
            let mut rng = level.child(r as u64).rng();
            let (data, new) = kind.sample(n, &mut rng)?;
            let x = &new.features;
            let sets = methods
                .iter()
                .map(|&m| Ok(clip(prediction_set(m, &score, &data, x, config.alpha, config.delta, &options)?.set)))
                .collect::<Result<Vec<IntervalUnion>>>()?;
            let set_of = |m: Method| &sets[methods.iter().position(|&k| k == m).expect("collected")];
            let diffs = config
                .pairs
                .iter()
                .map(|(a, b)| symmetric_difference_length(set_of(*a), set_of(*b)).value())
                .collect::<Vec<f64>>();
            let directed = match config.directed {
                Some(d) => {
                    let fc = prediction_set(Method::Full, &score, &data, x, config.alpha, d.delta1, &options)?.set;
                    let sc =
                        prediction_set(Method::Shortcut, &score, &data, x, config.alpha - d.eps, d.delta2, &options)?.set;
                    Some(difference_length(&clip(fc), &clip(sc)))
                }
                None => None,
            };
            Ok((diffs, directed))
        })?;
        for (p, pair) in config.pairs.iter().enumerate() {
            let values: Vec<f64> = draws.iter().map(|d| d.0[p]).collect();
            let s = summarize(&values);
            let max = values.iter().copied().fold(0.0, f64::max) + 0.0;
            table.push(vec![
                n.into(),
                pair_name(pair).into(),
                s.mean.into(),
                s.se.into(),
                s.q95.into(),
                max.into(),
                config.reps.into(),
            ]);
            per_pair[p].push(s.mean);
            if pair.0 == pair.1 || is_exact_identity(pair, &score) {
                report.add_check(Check::new(
                    format!("{}_identical_n{n}", pair_name(pair)),
                    max == 0.0,
                    format!("max symmetric difference {}", fmt17(max)),
                ));
            }
        }
        if let Some(d) = config.directed {
            let values: Vec<f64> = draws.iter().filter_map(|dr| dr.1).collect();
            directed_table.push(vec![
                n.into(),
                d.eps.into(),
                d.delta1.into(),
                d.delta2.into(),
                mean(&values).into(),
                std_error(&values).into(),
            ]);
        }
    }
    for (p, pair) in config.pairs.iter().enumerate() {
        if *pair == (Method::Full, Method::Shortcut) {
            let means = &per_pair[p];
            let listed: Vec<String> = means.iter().map(|v| fmt17(*v)).collect();
            report.add_check(Check::new(
                "fc_sc_nonincreasing",
                nonincreasing(means),
                format!("mean fc-sc symmetric difference across n: [{}]", listed.join(", ")),
            ));
            if means.len() >= 2 {
                let (first, last) = (means[0], *means.last().expect("nonempty"));
                report.add_check(Check::new(
                    "fc_sc_halved",
                    last < 0.5 * first,
                    format!("last {} < half of first {}", fmt17(last), fmt17(first)),
                ));
            }
        }
    }
    report.config = config_echo(&config)?;
    report.tables.push(table);
    if config.directed.is_some() {
        report.tables.push(directed_table);
    }
    report.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Pairs that coincide exactly by construction: the closed-form shortcut of
/// an out-of-sample score and the symmetrized Jackknife of its predictor.
fn is_exact_identity(pair: &(Method, Method), score: &ConformityScore) -> bool {
    let exact = [Method::ShortcutExact, Method::Jackknife];
    super::methods::is_out_sample(score) && exact.contains(&pair.0) && exact.contains(&pair.1)
}

// ---------------------------------------------------------------------------
// Finite-sample bound

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSampleConfig {
    #[serde(default = "finite_generator")]
    pub generator: GeneratorSpec,
    #[serde(default = "default_score")]
    pub score: String,
    #[serde(default = "finite_delta")]
    pub delta: f64,
    #[serde(default = "finite_eps")]
    pub eps1: f64,
    #[serde(default = "finite_eps")]
    pub eps2: f64,
    /// α grid of the sup; defaults to `{0.01, …, 0.99}`.
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: Vec<f64>,
    #[serde(default = "mc_reps")]
    pub outer_reps: usize,
    #[serde(default = "mc_reps")]
    pub inner_reps: usize,
    /// Draws for the right-hand-side expectations.
    #[serde(default = "rhs_reps")]
    pub rhs_reps: usize,
    /// Truncation level `K` of the second form of the bound.
    #[serde(default = "truncation_k")]
    pub truncation_k: f64,
}

fn finite_generator() -> GeneratorSpec {
    default_linear_gaussian(100)
}

fn finite_delta() -> f64 {
    0.2
}

fn finite_eps() -> f64 {
    0.1
}

/// `{0.01, 0.02, …, 0.99}`.
pub fn default_alpha_grid() -> Vec<f64> {
    (1..100).map(|i| i as f64 / 100.0).collect()
}

fn rhs_reps() -> usize {
    1000
}

fn truncation_k() -> f64 {
    3.0
}

impl Default for FiniteSampleConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

/// One draw of the right-hand-side statistics:
/// `(|C(t_{n+1}, T) − C(t_{n+1}, T^{swap 1})|, |C(t_{n+1}, T)|)`.
fn rhs_draw(score: &ConformityScore, generator: &dyn DataGenerator, n: usize, seed: RngSeed) -> Result<(f64, f64)> {
    let mut rng = seed.rng();
    let (data, new) = generator.sample(n, &mut rng)?;
    let replacement = generator.draw(&mut rng)?;
    let full = score.score_observation(&new, &data)?;
    let swapped = score.score_observation(&new, &data.with_replaced(0, replacement.response, &replacement.features)?)?;
    Ok(((full - swapped).abs(), full.abs()))
}

/// Monte Carlo check of the finite-sample theorem for the δ-inflated full
/// conformal set, in both the plain and the truncated form.
pub fn run_finite_sample_bound(config: &FiniteSampleConfig, seed: RngSeed) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut config = config.clone();
    config.generator = resolved_generator(&config.generator)?;
    if !(config.delta > 0.0 && config.eps1 > 0.0 && config.eps2 > 0.0 && config.truncation_k > 0.0) {
        return Err(Error::Config("delta, eps1, eps2 and truncation_k must be positive".into()));
    }
    if config.alpha_grid.is_empty() || config.alpha_grid.iter().any(|a| !a.is_finite()) {
        return Err(Error::Config("alpha_grid must be a nonempty list of finite values".into()));
    }
    if config.outer_reps < 100 || config.inner_reps < 100 || config.rhs_reps < 500 {
        return Err(Error::Config(
            "outer_reps and inner_reps must be at least 100 and rhs_reps at least 500".into(),
        ));
    }
    let score = parse_score(&config.score)?;
    let kind = config.generator.kind;
    let n = config.generator.n;
    let target = config.eps1 + config.eps2;

    let lhs_seed = seed.child(0);
    let sups = map_indexed(config.outer_reps, |r| {
        let rep = lhs_seed.child(r as u64);
        let mut rng = rep.rng();
        let (data, _) = kind.sample(n, &mut rng)?;
        let mut inner = rep.child(u64::MAX).rng();
        let mut misses = vec![0usize; config.alpha_grid.len()];
        for _ in 0..config.inner_reps {
            let t = kind.draw(&mut inner)?;
            let scores = score.augmented_scores(&data, &t.features, t.response)?;
            let f = build_ecdf(&scores.all())?;
            for (slot, &alpha) in misses.iter_mut().zip(&config.alpha_grid) {
                if !threshold(f.quantile(1.0 - alpha), config.delta).admits(scores.candidate) {
                    *slot += 1;
                }
            }
        }
        Ok(misses
            .iter()
            .zip(&config.alpha_grid)
            .map(|(&m, &alpha)| m as f64 / config.inner_reps as f64 - alpha)
            .fold(f64::NEG_INFINITY, f64::max))
    })?;
    let exceed = sups.iter().filter(|&&s| s >= target).count();
    let lhs = exceed as f64 / config.outer_reps as f64;
    let lhs_se = binomial_se(lhs, config.outer_reps);

    let rhs_seed = seed.child(1);
    let rhs_draws = map_indexed(config.rhs_reps, |r| rhs_draw(&score, &kind, n, rhs_seed.child(r as u64)))?;
    let swap: Vec<f64> = rhs_draws.iter().map(|d| d.0).collect();
    let magnitude: Vec<f64> = rhs_draws.iter().map(|d| d.1).collect();
    let (d, e1, e2) = (config.delta, config.eps1, config.eps2);
    let denom = d * e1 * e1 * e2;
    let m1 = (n + 1) as f64;
    let rhs = 3.0 * mean(&swap) / denom + mean(&magnitude) / (m1 * denom);
    let rhs_se = ((3.0 * std_error(&swap) / denom).powi(2) + (std_error(&magnitude) / (m1 * denom)).powi(2)).sqrt();

    let k = config.truncation_k;
    let cap = 2.0 * k + 3.0 * d;
    let tail: Vec<f64> = magnitude.iter().map(|&c| if c >= k { 1.0 } else { 0.0 }).collect();
    let capped: Vec<f64> = swap.iter().map(|&s| s.min(cap)).collect();
    let rhs_k = mean(&tail) / (d * e1 * e2) + 3.0 * mean(&capped) / denom + cap / (2.0 * m1 * denom);
    let rhs_k_se =
        ((std_error(&tail) / (d * e1 * e2)).powi(2) + (3.0 * std_error(&capped) / denom).powi(2)).sqrt();

    let mut report = ExperimentReport::new("finite-sample", seed.seed, config_echo(&config)?);
    let mut table = Table::new(
        "finite_sample",
        &[
            "n",
            "delta",
            "eps1",
            "eps2",
            "lhs",
            "lhs_se",
            "mean_sup_deviation",
            "rhs",
            "rhs_se",
            "rhs_truncated",
            "rhs_truncated_se",
            "truncation_k",
            "mean_swap_instability",
            "mean_abs_score",
        ],
    );
    table.push(vec![
        n.into(),
        d.into(),
        e1.into(),
        e2.into(),
        lhs.into(),
        lhs_se.into(),
        mean(&sups).into(),
        rhs.into(),
        rhs_se.into(),
        rhs_k.into(),
        rhs_k_se.into(),
        k.into(),
        mean(&swap).into(),
        mean(&magnitude).into(),
    ]);
    report.tables.push(table);
    let slack = 3.0 * (lhs_se * lhs_se + rhs_se * rhs_se).sqrt();
    report.add_check(Check::new(
        "lhs_le_rhs",
        lhs <= rhs + slack,
        format!("LHS {} <= RHS {} + 3 SE {}", fmt17(lhs), fmt17(rhs), fmt17(slack)),
    ));
    let slack_k = 3.0 * (lhs_se * lhs_se + rhs_k_se * rhs_k_se).sqrt();
    report.add_check(Check::new(
        "lhs_le_rhs_truncated",
        lhs <= rhs_k + slack_k,
        format!("LHS {} <= RHS(K={k}) {} + 3 SE {}", fmt17(lhs), fmt17(rhs_k), fmt17(slack_k)),
    ));
    report.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

// ---------------------------------------------------------------------------
// Refit benchmark for Algorithm 3

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefitConfig {
    #[serde(default = "refit_generator")]
    pub generator: GeneratorSpec,
    #[serde(default = "refit_score")]
    pub score: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub delta: f64,
    /// Tolerances; defaults to `2^-4, …, 2^-12`.
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    /// Search radius exponents `K`.
    #[serde(default = "default_ks")]
    pub ks: Vec<i32>,
    #[serde(default = "refit_reps")]
    pub reps: usize,
}

fn refit_generator() -> GeneratorSpec {
    default_linear_gaussian(30)
}

fn refit_score() -> String {
    "in-sample:ridge:1".into()
}

/// `2^-4, …, 2^-12`.
pub fn default_eps_list() -> Vec<f64> {
    (4..=12).map(|j| 2f64.powi(-j)).collect()
}

fn default_ks() -> Vec<i32> {
    vec![4, 8, 10]
}

fn refit_reps() -> usize {
    100
}

impl Default for RefitConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

/// Outcome of one Algorithm 3 run checked against the exact shortcut set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefitOutcome {
    pub refits: u64,
    pub bound: f64,
    pub eps: f64,
    /// `PS^sc ⊆ PI`.
    pub contained: bool,
    /// Whether `PS^sc ⊆ [−2^K+ε, 2^K−ε]`, the premise of the excess bound.
    pub excess_applicable: bool,
    /// `λ(PI ∖ PS^sc)`.
    pub excess: f64,
    pub exact: IntervalUnion,
    pub computed: IntervalUnion,
}

impl RefitOutcome {
    pub fn refits_ok(&self) -> bool {
        self.refits as f64 <= self.bound
    }

    pub fn excess_ok(&self) -> bool {
        !self.excess_applicable || self.excess <= 2.0 * self.eps
    }

    /// All three guarantees of the Appendix B proposition.
    pub fn all_ok(&self) -> bool {
        self.contained && self.refits_ok() && self.excess_ok()
    }
}

/// Runs Algorithm 3 and compares with the closed-form shortcut set.
pub fn refit_run(
    score: &ConformityScore,
    data: &DataSet,
    x_new: &[f64],
    alpha: f64,
    delta: f64,
    eps: f64,
    k: i32,
) -> Result<RefitOutcome> {
    let exact = shortcut_closed_form(score, data, x_new, alpha, delta)?;
    let run = shortcut_unimodal(score, data, x_new, alpha, delta, eps, k)?;
    let two_k = 2f64.powi(k);
    let window = IntervalUnion::single(crate::interval::Interval::closed(-two_k + eps, two_k - eps));
    let contained = exact.is_subset_of(&run.interval);
    Ok(RefitOutcome {
        refits: run.refits,
        bound: refit_bound(k, eps),
        contained,
        excess_applicable: exact.is_subset_of(&window),
        excess: difference_length(&run.interval, &exact),
        eps,
        exact,
        computed: run.interval,
    })
}

/// Observed Algorithm 3 refits against the Appendix B bound per `(K, ε)`,
/// with containment and excess-length checks on every run.
pub fn run_refit_benchmark(config: &RefitConfig, seed: RngSeed) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut config = config.clone();
    config.generator = resolved_generator(&config.generator)?;
    check_alpha(config.alpha)?;
    if config.reps == 0 || config.eps_list.is_empty() || config.ks.is_empty() {
        return Err(Error::Config("reps, eps_list and ks must be nonempty".into()));
    }
    let score = parse_score(&config.score)?;
    if !score.unimodal_hint() {
        return Err(Error::Config(format!("{} is not a unimodal score", score.label())));
    }
    for &k in &config.ks {
        for &eps in &config.eps_list {
            if !(eps > 0.0 && eps <= 2f64.powi(k)) {
                return Err(Error::Config(format!("eps {eps} must lie in (0, 2^{k}]")));
            }
        }
    }
    let kind = config.generator.kind;
    let n = config.generator.n;

    let mut report = ExperimentReport::new("refit-benchmark", seed.seed, config_echo(&config)?);
    let mut table = Table::new(
        "refits",
        &[
            "K",
            "eps",
            "bound",
            "max_refits",
            "mean_refits",
            "containment_failures",
            "excess_checked",
            "excess_failures",
            "max_excess",
            "reps",
        ],
    );
    let (mut refit_fail, mut contain_fail, mut excess_fail) = (0usize, 0usize, 0usize);
    for &k in &config.ks {
        for &eps in &config.eps_list {
            // the same training sets for every (K, ε) cell
            let outcomes = map_indexed(config.reps, |r| {
                let mut rng = seed.child(r as u64).rng();
                let (data, new) = kind.sample(n, &mut rng)?;
                refit_run(&score, &data, &new.features, config.alpha, config.delta, eps, k)
            })?;
            let refits: Vec<f64> = outcomes.iter().map(|o| o.refits as f64).collect();
            let max_refits = outcomes.iter().map(|o| o.refits).max().unwrap_or(0);
            let containment_failures = outcomes.iter().filter(|o| !o.contained).count();
            let checked = outcomes.iter().filter(|o| o.excess_applicable).count();
            let excess_failures = outcomes.iter().filter(|o| !o.excess_ok()).count();
            let max_excess = outcomes
                .iter()
                .filter(|o| o.excess_applicable)
                .map(|o| o.excess)
                .fold(0.0, f64::max);
            refit_fail += outcomes.iter().filter(|o| !o.refits_ok()).count();
            contain_fail += containment_failures;
            excess_fail += excess_failures;
            table.push(vec![
                k.into(),
                eps.into(),
                refit_bound(k, eps).into(),
                max_refits.into(),
                mean(&refits).into(),
                containment_failures.into(),
                checked.into(),
                excess_failures.into(),
                max_excess.into(),
                config.reps.into(),
            ]);
        }
    }
    report.tables.push(table);
    report.add_check(Check::new("refits_within_bound", refit_fail == 0, format!("{refit_fail} runs over the bound")));
    report.add_check(Check::new("containment", contain_fail == 0, format!("{contain_fail} runs with PS not in PI")));
    report.add_check(Check::new("excess_le_2eps", excess_fail == 0, format!("{excess_fail} runs with excess > 2 eps")));
    report.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

// ---------------------------------------------------------------------------
// Dispatch

/// Runs the named experiment with a JSON config (`None` = defaults).
pub fn run_experiment(name: &str, config: Option<&str>, seed: RngSeed) -> Result<ExperimentReport> {
    fn parse<T: serde::de::DeserializeOwned + Default>(config: Option<&str>) -> Result<T> {
        match config {
            Some(text) => super::io::parse_config(text),
            None => Ok(T::default()),
        }
    }
    match name {
        "marginal" => run_marginal_coverage(&parse(config)?, seed),
        "conditional" => run_conditional_coverage(&parse(config)?, seed),
        "equivalence" => run_equivalence(&parse(config)?, seed),
        "finite-sample" => run_finite_sample_bound(&parse(config)?, seed),
        "refit-benchmark" => run_refit_benchmark(&parse(config)?, seed),
        other => Err(Error::Config(format!(
            "unknown experiment '{other}' (expected one of {})",
            EXPERIMENTS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(report: &ExperimentReport, table: &str, column: &str, row: usize) -> f64 {
        report.table(table).unwrap().column(column).unwrap()[row].as_f64().unwrap()
    }

    #[test]
    fn alpha_zero_full_conformal_covers_everything() {
        let cfg = MarginalConfig {
            generator: GeneratorSpec::new(GeneratorKind::bounded_uniform(1), 15),
            alpha: 0.0,
            reps: 100,
            ..Default::default()
        };
        let report = run_marginal_coverage(&cfg, RngSeed::new(3)).unwrap();
        assert_eq!(cell(&report, "coverage", "coverage", 0), 1.0);
        assert!(report.passed);
    }

    #[test]
    fn data_dependent_alpha_is_report_only() {
        let cfg = MarginalConfig {
            reps: 100,
            alpha_rule: AlphaRule::ResidualSpread {
                reference_sd: 1.4,
                min: 0.05,
                max: 0.3,
            },
            ..Default::default()
        };
        let report = run_marginal_coverage(&cfg, RngSeed::new(3)).unwrap();
        assert!(report.checks.is_empty());
        let mean_alpha = cell(&report, "coverage", "mean_alpha", 0);
        assert!((0.05..=0.3).contains(&mean_alpha) && mean_alpha != 0.1);
    }

    #[test]
    fn constant_zero_backbone() {
        // predictor independent of T: swap instability vanishes
        let cfg = FiniteSampleConfig {
            score: "out-sample:zero".into(),
            generator: default_linear_gaussian(20),
            outer_reps: 100,
            inner_reps: 100,
            rhs_reps: 500,
            ..Default::default()
        };
        let report = run_finite_sample_bound(&cfg, RngSeed::new(4)).unwrap();
        assert_eq!(cell(&report, "finite_sample", "mean_swap_instability", 0), 0.0);
        let rhs = cell(&report, "finite_sample", "rhs", 0);
        let magnitude = cell(&report, "finite_sample", "mean_abs_score", 0);
        let expected = magnitude / (21.0 * 0.2 * 0.01 * 0.1);
        assert!((rhs - expected).abs() <= 1e-9 * expected);
        assert!(report.passed);
    }

    #[test]
    fn identical_methods_have_zero_difference() {
        let cfg = EquivalenceConfig {
            ns: vec![10],
            reps: 10,
            pairs: vec![(Method::Shortcut, Method::Shortcut), (Method::ShortcutExact, Method::Jackknife)],
            directed: None,
            ..Default::default()
        };
        let report = run_equivalence(&cfg, RngSeed::new(5)).unwrap();
        assert!(report.passed, "{}", report.summary());
        assert_eq!(report.checks.len(), 2);
        assert_eq!(report.tables.len(), 1);
    }

    #[test]
    fn refit_benchmark_small() {
        let cfg = RefitConfig {
            reps: 5,
            ks: vec![10],
            eps_list: vec![2f64.powi(-10), 1024.0],
            ..Default::default()
        };
        let report = run_refit_benchmark(&cfg, RngSeed::new(6)).unwrap();
        assert!(report.passed, "{}", report.summary());
        assert_eq!(cell(&report, "refits", "bound", 0), 82.0);
        assert_eq!(cell(&report, "refits", "bound", 1), 13.0);
        let out_sample = RefitConfig {
            score: "out-sample:mean".into(),
            ..cfg
        };
        assert!(run_refit_benchmark(&out_sample, RngSeed::new(6)).unwrap().passed);
    }

    #[test]
    fn conditional_estimators_agree_roughly() {
        let base = ConditionalConfig {
            ns: vec![30],
            outer_reps: 100,
            inner_reps: 400,
            final_exceed_max: None,
            ..Default::default()
        };
        let rb = run_conditional_coverage(&base, RngSeed::new(9)).unwrap();
        let mc = run_conditional_coverage(
            &ConditionalConfig {
                estimator: ConditionalEstimator::MonteCarlo,
                ..base.clone()
            },
            RngSeed::new(9),
        )
        .unwrap();
        assert_eq!(rb.config["estimator"], "conditional");
        let (a, b) = (
            cell(&rb, "conditional", "mean_miscoverage", 0),
            cell(&mc, "conditional", "mean_miscoverage", 0),
        );
        // same training sets; the estimators differ only in inner noise
        assert!((a - b).abs() < 0.01, "{a} vs {b}");
        let zero = ConditionalConfig {
            score: "out-sample:zero".into(),
            ..base
        };
        assert!(run_conditional_coverage(&zero, RngSeed::new(9)).is_ok());
    }
}
