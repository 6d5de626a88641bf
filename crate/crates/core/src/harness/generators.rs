//! Synthetic data generators with their continuous-case annotations.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DataGenerator, DataSet, Observation, RngSeed};

/// The generator families of the harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorKind {
    /// `x ~ N(0, I_p)`, `y = θᵀx + N(0, noise_sd²)` with `θ_j = theta_scale/√p`.
    LinearGaussian {
        p: usize,
        #[serde(default = "one")]
        theta_scale: f64,
        #[serde(default = "one")]
        noise_sd: f64,
    },
    /// `x ~ N(0, I_p)`, `y = θᵀx + t_df` with `θ_j = 1/√p`.
    LinearHeavyTail { p: usize, df: f64 },
    /// `x ~ U[0,1]^p`; given `x`, `y ∈ [0,1]` has density `1 + c(2y − 1)` with
    /// `c = mean(x) − 1/2` (so the density lies in `[1/2, 3/2]`).
    BoundedUniform { p: usize },
}

fn one() -> f64 {
    1.0
}

/// Generator plus sample size and optional CC annotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub n: usize,
    /// Sup-norm bound of the conditional response density (CC assumption).
    /// Filled in from the family when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cc_density_bound: Option<f64>,
}

impl GeneratorKind {
    pub fn linear_gaussian(p: usize, theta_scale: f64, noise_sd: f64) -> Self {
        GeneratorKind::LinearGaussian { p, theta_scale, noise_sd }
    }

    pub fn linear_heavy_tail(p: usize, df: f64) -> Self {
        GeneratorKind::LinearHeavyTail { p, df }
    }

    pub fn bounded_uniform(p: usize) -> Self {
        GeneratorKind::BoundedUniform { p }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GeneratorKind::LinearGaussian { theta_scale, noise_sd, .. } => {
                if !(noise_sd >= 0.0 && noise_sd.is_finite() && theta_scale.is_finite()) {
                    return Err(Error::Config(format!(
                        "linear_gaussian needs finite theta_scale and noise_sd >= 0 (got {theta_scale}, {noise_sd})"
                    )));
                }
            }
            GeneratorKind::LinearHeavyTail { df, .. } => {
                if !(df > 0.0 && df.is_finite()) {
                    return Err(Error::Config(format!("linear_heavy_tail needs df > 0, got {df}")));
                }
            }
            GeneratorKind::BoundedUniform { p } => {
                if p == 0 {
                    return Err(Error::Config("bounded_uniform needs p >= 1".into()));
                }
            }
        }
        Ok(())
    }

    /// Default CC annotation: the sup-norm of the conditional response density.
    pub fn default_cc_density_bound(&self) -> Option<f64> {
        match *self {
            GeneratorKind::LinearGaussian { noise_sd, .. } if noise_sd > 0.0 => {
                Some(1.0 / (noise_sd * (2.0 * std::f64::consts::PI).sqrt()))
            }
            GeneratorKind::LinearGaussian { .. } => None,
            GeneratorKind::LinearHeavyTail { df, .. } => Some(student_t_peak(df)),
            GeneratorKind::BoundedUniform { .. } => Some(1.5),
        }
    }

    /// Bounded response support, when the family has one.
    pub fn response_support(&self) -> Option<(f64, f64)> {
        match self {
            GeneratorKind::BoundedUniform { .. } => Some((0.0, 1.0)),
            _ => None,
        }
    }

    /// `P(y ≤ t | x)` when the family has a closed-form conditional law
    /// (Gaussian noise with `noise_sd > 0`, and the bounded family).
    pub fn conditional_cdf(&self, x: &[f64], t: f64) -> Option<f64> {
        match *self {
            GeneratorKind::LinearGaussian { noise_sd, .. } if noise_sd > 0.0 => {
                let mean: f64 = self.theta().iter().zip(x).map(|(a, b)| a * b).sum();
                let z = (t - mean) / noise_sd;
                Some(0.5 * libm::erfc(-z / std::f64::consts::SQRT_2))
            }
            GeneratorKind::BoundedUniform { p } => {
                let c = x.iter().sum::<f64>() / p as f64 - 0.5;
                let y = t.clamp(0.0, 1.0);
                Some(((1.0 - c) * y + c * y * y).clamp(0.0, 1.0))
            }
            _ => None,
        }
    }

    /// `P(y ∈ set | x)` via [`Self::conditional_cdf`].
    pub fn conditional_probability(&self, x: &[f64], set: &crate::interval::IntervalUnion) -> Option<f64> {
        let mut total = 0.0;
        for iv in set.intervals() {
            let upper = self.conditional_cdf(x, iv.upper.value())?;
            let lower = self.conditional_cdf(x, iv.lower.value())?;
            total += upper - lower;
        }
        Some(total.clamp(0.0, 1.0))
    }

    /// `θ` of the linear families.
    pub fn theta(&self) -> Vec<f64> {
        match *self {
            GeneratorKind::LinearGaussian { p, theta_scale, .. } => vec![theta_scale / (p.max(1) as f64).sqrt(); p],
            GeneratorKind::LinearHeavyTail { p, .. } => vec![1.0 / (p.max(1) as f64).sqrt(); p],
            GeneratorKind::BoundedUniform { .. } => Vec::new(),
        }
    }
}

/// Peak density of Student's t with `df` degrees of freedom.
fn student_t_peak(df: f64) -> f64 {
    (libm::lgamma((df + 1.0) / 2.0) - libm::lgamma(df / 2.0)).exp() / (df * std::f64::consts::PI).sqrt()
}

impl DataGenerator for GeneratorKind {
    fn dim(&self) -> usize {
        match *self {
            GeneratorKind::LinearGaussian { p, .. }
            | GeneratorKind::LinearHeavyTail { p, .. }
            | GeneratorKind::BoundedUniform { p } => p,
        }
    }

    fn draw(&self, rng: &mut dyn RngCore) -> Result<Observation> {
        match *self {
            GeneratorKind::LinearGaussian { p, noise_sd, .. } => {
                let x: Vec<f64> = (0..p).map(|_| StandardNormal.sample(rng)).collect();
                let signal: f64 = self.theta().iter().zip(&x).map(|(t, v)| t * v).sum();
                let noise: f64 = StandardNormal.sample(rng);
                Ok(Observation::new(signal + noise_sd * noise, x))
            }
            GeneratorKind::LinearHeavyTail { p, df } => {
                let x: Vec<f64> = (0..p).map(|_| StandardNormal.sample(rng)).collect();
                let signal: f64 = self.theta().iter().zip(&x).map(|(t, v)| t * v).sum();
                let t = StudentT::new(df).map_err(|e| Error::Config(format!("student t: {e}")))?;
                Ok(Observation::new(signal + t.sample(rng), x))
            }
            GeneratorKind::BoundedUniform { p } => {
                let x: Vec<f64> = (0..p).map(|_| rng.random::<f64>()).collect();
                let c = x.iter().sum::<f64>() / p as f64 - 0.5;
                let u: f64 = rng.random();
                Ok(Observation::new(bounded_inverse_cdf(c, u), x))
            }
        }
    }
}

/// Inverse of `F(y) = (1 − c)y + c y²` on `[0, 1]`.
fn bounded_inverse_cdf(c: f64, u: f64) -> f64 {
    if c.abs() < 1e-12 {
        return u;
    }
    let b = 1.0 - c;
    // numerically stable root of c y² + b y − u = 0 in [0, 1]
    let y = 2.0 * u / (b + (b * b + 4.0 * c * u).sqrt());
    y.clamp(0.0, 1.0)
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize) -> Self {
        Self {
            kind,
            n,
            cc_density_bound: kind.default_cc_density_bound(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kind.validate()?;
        if self.n < 2 {
            return Err(Error::Config(format!("sample size n = {} must be at least 2", self.n)));
        }
        Ok(())
    }

    /// The annotation, defaulting to the family's value.
    pub fn resolved_cc_density_bound(&self) -> Option<f64> {
        self.cc_density_bound.or_else(|| self.kind.default_cc_density_bound())
    }

    /// Copy with a different sample size.
    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..*self }
    }
}

/// `n + 1` i.i.d. draws; the first `n` form the training set.
pub fn generate(spec: &GeneratorSpec, seed: RngSeed) -> Result<(DataSet, Observation)> {
    spec.validate()?;
    let mut rng = seed.rng();
    spec.kind.sample(spec.n, &mut rng)
}
