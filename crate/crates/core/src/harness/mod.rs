//! Monte Carlo harness: generators, experiments, lemma suites and report I/O.

pub mod experiments;
pub mod generators;
pub mod io;
pub mod lemmas;
pub mod methods;
pub mod report;

pub use experiments::*;
pub use generators::{generate, GeneratorKind, GeneratorSpec};
pub use lemmas::{run_lemma_suites, LemmaConfig};
pub use methods::{parse_predictor, parse_score, prediction_set, MembershipOracle, Method, MethodOutput, SetOptions};
pub use report::{format_float, Cell, Check, ExperimentReport, Table};
