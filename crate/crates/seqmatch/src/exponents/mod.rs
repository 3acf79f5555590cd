//! Numerical evaluation of the theoretical error exponents: the closed-form
//! sequential mismatch exponent, the constrained-minimization exponents for
//! fixed-length and unknown-count tests, and the threshold floors that mark
//! where each exponent hits zero.

mod oracle;
mod solver;

pub use oracle::{
    grid_equality_collapse, grid_kernel, grid_weighted_kl_min, OracleResult, DEFAULT_GRID_POINTS,
};
pub use solver::{constrained_min, geometric_mixture, Constraint, KernelSolution};

use serde::{Deserialize, Serialize};

use crate::dist::{gjs, renyi, Distribution};
use crate::error::{Error, Result};
use crate::hypothesis::{enumerate_matchings, set_difference, HypothesisIndex, MatchingSet};
use crate::model::SourceModel;

/// An exponent value: finite, or the tagged `+∞` sentinel produced by an
/// empty minimum (no competing hypothesis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExponentValue {
    Finite(f64),
    Infinite,
}

impl ExponentValue {
    pub fn as_f64(&self) -> f64 {
        match self {
            ExponentValue::Finite(v) => *v,
            ExponentValue::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExponentValue::Finite(_))
    }
}

impl Serialize for ExponentValue {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExponentValue::Finite(v) => serializer.serialize_f64(*v),
            ExponentValue::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExponentValue {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Num(f64),
            Tag(String),
        }
        match Wire::deserialize(deserializer)? {
            Wire::Num(v) => Ok(ExponentValue::Finite(v)),
            Wire::Tag(s) if s == "inf" => Ok(ExponentValue::Infinite),
            Wire::Tag(s) => Err(serde::de::Error::custom(format!("unknown exponent tag {s:?}"))),
        }
    }
}

/// How a result was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    DualBisection,
    GridOracle,
    /// The outer minimum ran over an empty candidate set.
    EmptyMin,
}

/// The minimizing distributions and the hypothesis addresses achieving the
/// outer minimum.
#[derive(Debug, Clone, Serialize)]
pub struct ArgminWitness {
    pub left: Vec<Distribution>,
    pub right: Vec<Distribution>,
    pub hypotheses: Vec<HypothesisIndex>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentResult {
    pub value: ExponentValue,
    pub witness: Option<ArgminWitness>,
    pub method: Method,
    pub est_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ExponentResult {
    fn empty_min(note: &str) -> Self {
        Self {
            value: ExponentValue::Infinite,
            witness: None,
            method: Method::EmptyMin,
            est_error: 0.0,
            note: Some(note.to_string()),
        }
    }
}

/// A threshold floor: the value below which the paired exponent is positive,
/// with the matching achieving the minimum.
#[derive(Debug, Clone, Serialize)]
pub struct FloorValue {
    pub value: ExponentValue,
    pub minimizer: Option<MatchingSet>,
}

fn require_match_truth(model: &SourceModel) -> Result<(usize, usize, MatchingSet)> {
    model.validate()?;
    match model.truth {
        HypothesisIndex::Match { k, l } => Ok((k, l, model.truth_matching()?)),
        HypothesisIndex::Reject => Err(Error::Model(
            "this exponent needs a model with a true matching".into(),
        )),
    }
}

fn require_null_truth(model: &SourceModel) -> Result<()> {
    model.validate()?;
    if !model.is_null() {
        return Err(Error::Model("this exponent needs a no-match model".into()));
    }
    Ok(())
}

/// One term of the sequential mismatch exponent: the Rényi cost of the pairs
/// a competitor adds beyond the truth.
fn sequential_term(model: &SourceModel, competitor: &MatchingSet, truth: &MatchingSet) -> f64 {
    let order = model.rates.beta / model.rates.total();
    set_difference(competitor, truth)
        .into_iter()
        .map(|(i, j)| {
            model.rates.alpha
                * renyi(&model.right_dists[j], &model.left_dists[i], order)
                    .expect("model distributions share an alphabet")
        })
        .sum()
}

/// Builds the collapse witness for a competitor: every pair of the
/// competitor's matching is set to the geometric mixture of its references.
fn collapse_witness(model: &SourceModel, competitor: &MatchingSet) -> (Vec<Distribution>, Vec<Distribution>) {
    let mut left: Vec<Distribution> = model
        .left_dists
        .iter()
        .map(|d| d.smoothed(solver::SUPPORT_SMOOTHING))
        .collect();
    let mut right: Vec<Distribution> = model
        .right_dists
        .iter()
        .map(|d| d.smoothed(solver::SUPPORT_SMOOTHING))
        .collect();
    for &(i, j) in competitor.pairs() {
        let v = geometric_mixture(&left[i], &right[j], &model.rates);
        left[i] = v.clone();
        right[j] = v;
    }
    (left, right)
}

/// The sequential-test mismatch exponent: the smallest Rényi cost, over all
/// competing matchings, of the pairs the competitor adds beyond the truth.
/// Exact closed form.
pub fn mismatch_exponent_sequential(model: &SourceModel) -> Result<ExponentResult> {
    let (k, l, truth) = require_match_truth(model)?;
    let all = enumerate_matchings(&model.dims, k)?;
    let mut best: Option<(usize, f64)> = None;
    for (t, m) in all.iter().enumerate() {
        if t == l {
            continue;
        }
        let term = sequential_term(model, m, &truth);
        if best.map_or(true, |(_, v)| term < v) {
            best = Some((t, term));
        }
    }
    match best {
        None => Ok(ExponentResult::empty_min("no competing hypothesis")),
        Some((t, value)) => {
            let (left, right) = collapse_witness(model, &all[t]);
            Ok(ExponentResult {
                value: ExponentValue::Finite(value),
                witness: Some(ArgminWitness {
                    left,
                    right,
                    hypotheses: vec![HypothesisIndex::Match { k, l: t }],
                }),
                method: Method::ClosedForm,
                est_error: 0.0,
                note: None,
            })
        }
    }
}

/// The fixed-length-test mismatch exponent: for each competitor, the cheapest
/// joint deviation that makes the competitor score no worse than the truth.
///
/// Each competitor is solved by the dual kernel with the difference
/// constraint; since the sequential collapse point is always feasible here,
/// it caps the per-competitor value, which keeps the fixed-length exponent at
/// or below the sequential one by construction.
pub fn mismatch_exponent_fixed(model: &SourceModel) -> Result<ExponentResult> {
    let (k, l, truth) = require_match_truth(model)?;
    let all = enumerate_matchings(&model.dims, k)?;
    if all.len() < 2 {
        return Ok(ExponentResult::empty_min("no competing hypothesis"));
    }
    let mut best: Option<(usize, KernelSolution)> = None;
    for (t, m) in all.iter().enumerate() {
        if t == l {
            continue;
        }
        let constraint = Constraint {
            plus: m.pairs().to_vec(),
            minus: truth.pairs().to_vec(),
            bound: 0.0,
        }
        .simplified();
        let mut sol = constrained_min(&model.left_dists, &model.right_dists, &model.rates, &[constraint])?;
        let cap = sequential_term(model, m, &truth);
        if cap < sol.value {
            let (left, right) = collapse_witness(model, m);
            sol = KernelSolution {
                value: cap,
                left,
                right,
                est_error: sol.est_error,
                at_data: false,
            };
        }
        if best.as_ref().map_or(true, |(_, b)| sol.value < b.value) {
            best = Some((t, sol));
        }
    }
    let (t, sol) = best.expect("at least one competitor");
    Ok(ExponentResult {
        value: ExponentValue::Finite(sol.value),
        witness: Some(ArgminWitness {
            left: sol.left,
            right: sol.right,
            hypotheses: vec![HypothesisIndex::Match { k, l: t }],
        }),
        method: Method::DualBisection,
        est_error: sol.est_error,
        note: None,
    })
}

/// The false alarm exponent at threshold `lambda`: over every hypothesis, the
/// cheapest deviation of a no-match model that drags that hypothesis's score
/// down to `lambda`.
pub fn false_alarm_exponent(model: &SourceModel, lambda: f64) -> Result<ExponentResult> {
    require_null_truth(model)?;
    let mut best: Option<(HypothesisIndex, KernelSolution)> = None;
    for k in 1..=model.dims.m2 {
        for (l, m) in enumerate_matchings(&model.dims, k)?.iter().enumerate() {
            let constraint = Constraint::upper(m.pairs().to_vec(), lambda);
            let sol =
                constrained_min(&model.left_dists, &model.right_dists, &model.rates, &[constraint])?;
            let better = best.as_ref().map_or(true, |(_, b)| sol.value < b.value);
            if better {
                let zero = sol.value == 0.0;
                best = Some((HypothesisIndex::Match { k, l }, sol));
                if zero {
                    return Ok(finish_kernel(best.unwrap()));
                }
            }
        }
    }
    Ok(finish_kernel(best.expect("hypothesis space is never empty")))
}

fn finish_kernel((h, sol): (HypothesisIndex, KernelSolution)) -> ExponentResult {
    ExponentResult {
        value: ExponentValue::Finite(sol.value),
        witness: Some(ArgminWitness {
            left: sol.left,
            right: sol.right,
            hypotheses: vec![h],
        }),
        method: Method::DualBisection,
        est_error: sol.est_error,
        note: None,
    }
}

/// The ambiguity exponent at threshold `lambda`: over every pair of distinct
/// same-count competitors, the cheapest deviation putting both scores at or
/// below `lambda`. Governs how long evidence can stay consistent with two
/// matchings at once.
pub fn ambiguity_exponent(model: &SourceModel, lambda: f64) -> Result<ExponentResult> {
    let (k, _, _) = require_match_truth(model)?;
    let all = enumerate_matchings(&model.dims, k)?;
    if all.len() < 2 {
        return Ok(ExponentResult::empty_min("no competing hypothesis"));
    }
    let mut best: Option<(Vec<HypothesisIndex>, KernelSolution)> = None;
    for t1 in 0..all.len() {
        for t2 in (t1 + 1)..all.len() {
            let constraints = [
                Constraint::upper(all[t1].pairs().to_vec(), lambda),
                Constraint::upper(all[t2].pairs().to_vec(), lambda),
            ];
            let sol =
                constrained_min(&model.left_dists, &model.right_dists, &model.rates, &constraints)?;
            let better = best.as_ref().map_or(true, |(_, b)| sol.value < b.value);
            if better {
                let zero = sol.value == 0.0;
                best = Some((
                    vec![
                        HypothesisIndex::Match { k, l: t1 },
                        HypothesisIndex::Match { k, l: t2 },
                    ],
                    sol,
                ));
                if zero {
                    break;
                }
            }
        }
    }
    let (hyps, sol) = best.expect("at least one competitor pair");
    Ok(ExponentResult {
        value: ExponentValue::Finite(sol.value),
        witness: Some(ArgminWitness {
            left: sol.left,
            right: sol.right,
            hypotheses: hyps,
        }),
        method: Method::DualBisection,
        est_error: sol.est_error,
        note: None,
    })
}

/// The overestimation exponent at threshold `lambda`: over every hypothesis
/// with more matches than the truth, the cheapest deviation dragging its
/// score down to `lambda`. `+∞` when the truth already uses every right
/// sequence.
pub fn overestimate_exponent(model: &SourceModel, lambda: f64) -> Result<ExponentResult> {
    let (k, _, _) = require_match_truth(model)?;
    if k == model.dims.m2 {
        return Ok(ExponentResult::empty_min("no hypothesis with more matches"));
    }
    let mut best: Option<(HypothesisIndex, KernelSolution)> = None;
    for h in (k + 1)..=model.dims.m2 {
        for (t, m) in enumerate_matchings(&model.dims, h)?.iter().enumerate() {
            let constraint = Constraint::upper(m.pairs().to_vec(), lambda);
            let sol =
                constrained_min(&model.left_dists, &model.right_dists, &model.rates, &[constraint])?;
            let better = best.as_ref().map_or(true, |(_, b)| sol.value < b.value);
            if better {
                let zero = sol.value == 0.0;
                best = Some((HypothesisIndex::Match { k: h, l: t }, sol));
                if zero {
                    return Ok(finish_kernel(best.unwrap()));
                }
            }
        }
    }
    Ok(finish_kernel(best.expect("some larger hypothesis exists")))
}

/// The smallest cross-database divergence of a no-match model: the ceiling
/// for the no-match threshold `lambda1`.
pub fn min_pair_gjs(model: &SourceModel) -> Result<f64> {
    require_null_truth(model)?;
    let mut best = f64::INFINITY;
    for p in &model.left_dists {
        for q in &model.right_dists {
            best = best.min(gjs(p, q, &model.rates)?);
        }
    }
    Ok(best)
}

/// The asymptotic gap separating the truth from its best same-count
/// competitor: the sum of divergences over the competitor's extra pairs,
/// minimized over competitors. The ceiling for `lambda3`.
pub fn competitor_floor(model: &SourceModel) -> Result<FloorValue> {
    let (k, l, truth) = require_match_truth(model)?;
    let all = enumerate_matchings(&model.dims, k)?;
    let mut best: Option<(f64, MatchingSet)> = None;
    for (t, m) in all.iter().enumerate() {
        if t == l {
            continue;
        }
        let mut total = 0.0;
        for (i, j) in set_difference(m, &truth) {
            total += gjs(&model.left_dists[i], &model.right_dists[j], &model.rates)?;
        }
        if best.as_ref().map_or(true, |(v, _)| total < *v) {
            best = Some((total, m.clone()));
        }
    }
    Ok(match best {
        None => FloorValue {
            value: ExponentValue::Infinite,
            minimizer: None,
        },
        Some((v, m)) => FloorValue {
            value: ExponentValue::Finite(v),
            minimizer: Some(m),
        },
    })
}

/// The asymptotic floor for scores of hypotheses with one extra match: over
/// all `(K+1)`-matchings, the sum of divergences of pairs outside the truth.
/// The ceiling for `lambda2`.
pub fn overmatch_floor(model: &SourceModel) -> Result<FloorValue> {
    let (k, _, truth) = require_match_truth(model)?;
    if k == model.dims.m2 {
        return Ok(FloorValue {
            value: ExponentValue::Infinite,
            minimizer: None,
        });
    }
    let mut best: Option<(f64, MatchingSet)> = None;
    for m in enumerate_matchings(&model.dims, k + 1)? {
        let mut total = 0.0;
        for &(i, j) in m.pairs() {
            if !truth.contains((i, j)) {
                total += gjs(&model.left_dists[i], &model.right_dists[j], &model.rates)?;
            }
        }
        if best.as_ref().map_or(true, |(v, _)| total < *v) {
            best = Some((total, m));
        }
    }
    let (v, m) = best.expect("K < M2 leaves at least one larger matching");
    Ok(FloorValue {
        value: ExponentValue::Finite(v),
        minimizer: Some(m),
    })
}

/// The naive floor obtained by extending the truth with one disjoint pair:
/// the smallest divergence over pairs untouched by the truth. Never below
/// [`overmatch_floor`], and strictly above it on some models.
pub fn disjoint_extension_floor(model: &SourceModel) -> Result<FloorValue> {
    let (_, _, truth) = require_match_truth(model)?;
    let used_left = truth.matched_left();
    let used_right = truth.matched_right();
    let mut best: Option<(f64, (usize, usize))> = None;
    for i in 0..model.dims.m1 {
        if used_left.contains(&i) {
            continue;
        }
        for j in 0..model.dims.m2 {
            if used_right.contains(&j) {
                continue;
            }
            let g = gjs(&model.left_dists[i], &model.right_dists[j], &model.rates)?;
            if best.as_ref().map_or(true, |(v, _)| g < *v) {
                best = Some((g, (i, j)));
            }
        }
    }
    Ok(match best {
        None => FloorValue {
            value: ExponentValue::Infinite,
            minimizer: None,
        },
        Some((v, (i, j))) => {
            let mut pairs = truth.pairs().to_vec();
            pairs.push((i, j));
            FloorValue {
                value: ExponentValue::Finite(v),
                minimizer: Some(MatchingSet::new(pairs).expect("extension stays injective")),
            }
        }
    })
}

/// Which exponent or floor to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentKind {
    SequentialMismatch,
    FixedMismatch,
    FalseAlarm,
    Ambiguity,
    Overestimate,
    MinPairGjs,
    CompetitorFloor,
    OvermatchFloor,
    DisjointExtensionFloor,
}

impl ExponentKind {
    pub fn needs_lambda(&self) -> bool {
        matches!(
            self,
            ExponentKind::FalseAlarm | ExponentKind::Ambiguity | ExponentKind::Overestimate
        )
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sequential_mismatch" | "es" => Ok(Self::SequentialMismatch),
            "fixed_mismatch" | "ef" => Ok(Self::FixedMismatch),
            "false_alarm" | "er" => Ok(Self::FalseAlarm),
            "ambiguity" | "f" => Ok(Self::Ambiguity),
            "overestimate" | "g" => Ok(Self::Overestimate),
            "min_pair_gjs" | "g0" => Ok(Self::MinPairGjs),
            "competitor_floor" | "lambda" => Ok(Self::CompetitorFloor),
            "overmatch_floor" | "kappa" => Ok(Self::OvermatchFloor),
            "disjoint_extension_floor" => Ok(Self::DisjointExtensionFloor),
            other => Err(Error::Config(format!("unknown exponent kind {other:?}"))),
        }
    }
}

/// Evaluates one exponent request against a model, as a JSON-ready value.
pub fn evaluate(model: &SourceModel, kind: ExponentKind, lambda: Option<f64>) -> Result<serde_json::Value> {
    let lam = || {
        lambda.ok_or_else(|| Error::Config(format!("exponent kind {kind:?} needs a lambda")))
    };
    let to_json = |r: &ExponentResult| serde_json::to_value(r).expect("results serialize");
    Ok(match kind {
        ExponentKind::SequentialMismatch => to_json(&mismatch_exponent_sequential(model)?),
        ExponentKind::FixedMismatch => to_json(&mismatch_exponent_fixed(model)?),
        ExponentKind::FalseAlarm => to_json(&false_alarm_exponent(model, lam()?)?),
        ExponentKind::Ambiguity => to_json(&ambiguity_exponent(model, lam()?)?),
        ExponentKind::Overestimate => to_json(&overestimate_exponent(model, lam()?)?),
        ExponentKind::MinPairGjs => serde_json::json!({ "value": min_pair_gjs(model)? }),
        ExponentKind::CompetitorFloor => {
            serde_json::to_value(competitor_floor(model)?).expect("floors serialize")
        }
        ExponentKind::OvermatchFloor => {
            serde_json::to_value(overmatch_floor(model)?).expect("floors serialize")
        }
        ExponentKind::DisjointExtensionFloor => {
            serde_json::to_value(disjoint_extension_floor(model)?).expect("floors serialize")
        }
    })
}
