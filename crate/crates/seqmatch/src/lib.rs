//! Sequential and fixed-length tests for statistical sequence matching.
//!
//! Two databases of categorical sequences grow over time; sequences are
//! matched when they share a generating distribution. This crate provides:
//!
//! - [`dist`]: finite-alphabet distributions, empirical types, and the KL /
//!   Rényi / generalized Jensen-Shannon divergences everything rests on;
//! - [`hypothesis`]: enumeration of all injective matching hypotheses;
//! - [`scoring`]: the empirical scoring function and threshold schedules;
//! - [`seq_known`]: tests for a known number of matches — the sequential
//!   test, the minimal-score fixed-length test, and a reject-capable
//!   second-minimum variant used for ordering comparisons;
//! - [`seq_unknown`]: the sequential and one-step fixed-length tests for an
//!   unknown number of matches;
//! - [`exponents`]: numerical computation of every theoretical error
//!   exponent, with a brute-force grid oracle for validation;
//! - [`simulator`]: a deterministic Monte Carlo engine that estimates error
//!   rates and stopping times and compares them to the theory;
//! - [`config`] and [`verify`]: declarative experiment configs and the
//!   built-in reference-value checklist behind the `verify-paper`
//!   subcommand of the bundled CLI.
//!
//! Start with the runnable examples (`cargo run --release -p seqmatch
//! --example <name>`): `enumerate_hypotheses`, `divergence_tour`,
//! `sequential_known`, `sequential_unknown`, `error_exponents`, `campaign`.

pub mod config;
pub mod dist;
pub mod error;
pub mod exponents;
pub mod hypothesis;
pub mod model;
pub mod scoring;
pub mod seq_known;
pub mod seq_unknown;
pub mod simulator;
pub mod verify;

pub use dist::{binary_kl, gjs, kl, mixture, renyi, Distribution, EmpiricalType, Rates};
pub use error::{Error, Result};
pub use hypothesis::{
    count_all, count_hypotheses, enumerate_all, enumerate_matchings, HypothesisIndex, MatchingSet,
    ProblemDims,
};
pub use model::SourceModel;
pub use scoring::{score, stop_threshold, DatabaseSnapshot, ScoreTable};
