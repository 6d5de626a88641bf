//! Shared fixtures for the benchmarks.

use conformal_kit::harness::GeneratorKind;
use conformal_kit::{DataGenerator, DataSet, GridSpec, Observation, RngSeed, StepFunction};

/// Training set of size `n` from `linear_gaussian(p = 2)` plus a fresh point.
pub fn linear_instance(n: usize, seed: u64) -> (DataSet, Observation) {
    let mut rng = RngSeed::new(seed).rng();
    GeneratorKind::linear_gaussian(2, 1.0, 1.0)
        .sample(n, &mut rng)
        .expect("valid generator")
}

/// The default realization grid around the fresh point with `points` points.
pub fn grid_around(center: f64, points: usize) -> GridSpec {
    GridSpec::with_points(center - 10.0, center + 10.0, points).expect("valid grid")
}

/// ECDF of `m` pseudo-random values.
pub fn random_ecdf(m: usize, seed: u64) -> StepFunction {
    let mut rng = RngSeed::new(seed).rng();
    let kind = GeneratorKind::linear_gaussian(0, 1.0, 1.0);
    let values: Vec<f64> = (0..m).map(|_| kind.draw(&mut rng).expect("draw").response).collect();
    conformal_kit::build_ecdf(&values).expect("nonempty")
}
