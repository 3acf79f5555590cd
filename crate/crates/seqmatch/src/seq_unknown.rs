//! Tests for the case where the number of matches is unknown, including zero:
//! a sequential test driven by two stopping events and a one-step
//! fixed-length variant.
//!
//! Stopping events at time `n`, over the full hypothesis list:
//! - the no-match event: every hypothesis scores above `lambda1`;
//! - per-hypothesis low-score events: the hypothesis scores at most
//!   `lambda2` while every other hypothesis with the same match count scores
//!   above `lambda3`. The test stops and decides a hypothesis only when its
//!   event is the single one firing.

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize};

use crate::dist::Rates;
use crate::error::{Error, Result};
use crate::hypothesis::{enumerate_all, HypothesisIndex, MatchingSet, ProblemDims};
use crate::scoring::{DatabaseSnapshot, ScoreTable, SnapshotSource};

/// The three stopping thresholds. All positive, with
/// `lambda2 <= min(lambda1, lambda3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawThresholds")]
pub struct Thresholds {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

#[derive(Deserialize)]
struct RawThresholds {
    lambda1: f64,
    lambda2: f64,
    lambda3: f64,
}

impl TryFrom<RawThresholds> for Thresholds {
    type Error = Error;

    fn try_from(raw: RawThresholds) -> Result<Self> {
        Thresholds::new(raw.lambda1, raw.lambda2, raw.lambda3)
    }
}

impl Thresholds {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64) -> Result<Self> {
        for (name, v) in [("lambda1", lambda1), ("lambda2", lambda2), ("lambda3", lambda3)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if lambda2 > lambda1.min(lambda3) {
            return Err(Error::Domain(format!(
                "threshold invariant violated: lambda2 = {lambda2} exceeds min(lambda1, lambda3) = {}",
                lambda1.min(lambda3)
            )));
        }
        Ok(Self {
            lambda1,
            lambda2,
            lambda3,
        })
    }
}

/// Which stopping event produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiredEvent {
    /// Every score exceeded `lambda1`.
    AllAbove,
    /// Exactly one hypothesis had its low-score event fire; `l` is 0-based.
    UniqueLow { k: usize, l: usize },
    /// Fixed-length only: no unique low-score hypothesis at the horizon.
    NoUniqueLow,
}

/// Final score of one hypothesis, addressed by `(k, l)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreEntry {
    pub k: usize,
    /// 0-based index within the `k`-group; serialized 1-based.
    pub l: usize,
    pub score: f64,
}

impl Serialize for ScoreEntry {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ScoreEntry", 3)?;
        s.serialize_field("k", &self.k)?;
        s.serialize_field("l", &(self.l + 1))?;
        s.serialize_field("score", &self.score)?;
        s.end()
    }
}

/// Outcome of an unknown-match-count test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnknownKVerdict {
    pub decided: HypothesisIndex,
    #[serde(rename = "tau")]
    pub stopping_time: u64,
    pub fired_event: FiredEvent,
    /// Scores of every hypothesis at the stopping time.
    pub score_summary: Vec<ScoreEntry>,
    /// Thresholds the run used.
    pub thresholds: Thresholds,
}

/// The no-match stopping event: true iff every hypothesis scores strictly
/// above `lambda1`.
pub fn event_all_above(
    snapshot: &DatabaseSnapshot,
    hypotheses: &[(usize, usize, MatchingSet)],
    rates: &Rates,
    thresholds: &Thresholds,
) -> Result<bool> {
    let table = ScoreTable::build(snapshot, rates)?;
    Ok(hypotheses
        .iter()
        .all(|(_, _, m)| table.score(m) > thresholds.lambda1))
}

/// The two components of one hypothesis's low-score event: its own score at
/// most `lambda2`, and the smallest other same-count score above `lambda3`.
/// With a single hypothesis in the group the inner minimum runs over an
/// empty set and counts as `+∞`, so the second component holds vacuously.
pub fn event_low_components(
    snapshot: &DatabaseSnapshot,
    hypotheses: &[(usize, usize, MatchingSet)],
    h: usize,
    t: usize,
    rates: &Rates,
    thresholds: &Thresholds,
) -> Result<(bool, bool)> {
    let table = ScoreTable::build(snapshot, rates)?;
    let own = hypotheses
        .iter()
        .find(|(k, l, _)| *k == h && *l == t)
        .map(|(_, _, m)| table.score(m))
        .ok_or_else(|| Error::IndexOutOfRange(format!("hypothesis (k={h}, l={})", t + 1)))?;
    let others_min = hypotheses
        .iter()
        .filter(|(k, l, _)| *k == h && *l != t)
        .map(|(_, _, m)| table.score(m))
        .fold(f64::INFINITY, f64::min);
    Ok((own <= thresholds.lambda2, others_min > thresholds.lambda3))
}

/// Scores grouped by match count, with positional `l` inside each group.
struct GroupedScores {
    /// (k, scores of the k-group in canonical order)
    groups: Vec<(usize, Vec<f64>)>,
}

impl GroupedScores {
    fn compute(
        table: &ScoreTable,
        grouped: &[(usize, Vec<MatchingSet>)],
    ) -> Self {
        let groups = grouped
            .iter()
            .map(|(k, ms)| (*k, ms.iter().map(|m| table.score(m)).collect()))
            .collect();
        Self { groups }
    }

    fn all_above(&self, lambda1: f64) -> bool {
        self.groups
            .iter()
            .all(|(_, s)| s.iter().all(|&v| v > lambda1))
    }

    /// Returns the unique hypothesis whose low-score event fires, if exactly
    /// one does.
    fn unique_low(&self, thresholds: &Thresholds) -> Option<(usize, usize)> {
        let mut found = None;
        for (k, scores) in &self.groups {
            // Two smallest scores of the group decide every inner minimum.
            let mut min1 = f64::INFINITY;
            let mut min1_at = usize::MAX;
            let mut min2 = f64::INFINITY;
            for (l, &s) in scores.iter().enumerate() {
                if s < min1 {
                    min2 = min1;
                    min1 = s;
                    min1_at = l;
                } else if s < min2 {
                    min2 = s;
                }
            }
            for (l, &s) in scores.iter().enumerate() {
                let b1 = s <= thresholds.lambda2;
                if !b1 {
                    continue;
                }
                let others_min = if l == min1_at { min2 } else { min1 };
                if others_min > thresholds.lambda3 {
                    if found.is_some() {
                        return None; // second firing event: not unique
                    }
                    found = Some((*k, l));
                }
            }
        }
        found
    }

    fn summary(&self) -> Vec<ScoreEntry> {
        self.groups
            .iter()
            .flat_map(|(k, scores)| {
                scores
                    .iter()
                    .enumerate()
                    .map(move |(l, &score)| ScoreEntry { k: *k, l, score })
            })
            .collect()
    }
}

fn group_hypotheses(dims: &ProblemDims) -> Result<Vec<(usize, Vec<MatchingSet>)>> {
    let mut groups: Vec<(usize, Vec<MatchingSet>)> = Vec::with_capacity(dims.m2);
    for (k, _, m) in enumerate_all(dims)? {
        match groups.last_mut() {
            Some((gk, ms)) if *gk == k => ms.push(m),
            _ => groups.push((k, vec![m])),
        }
    }
    Ok(groups)
}

fn verdict_at(
    grouped: &GroupedScores,
    n: u64,
    thresholds: &Thresholds,
    fl_mode: bool,
) -> Option<UnknownKVerdict> {
    let unique = grouped.unique_low(thresholds);
    let all_above = grouped.all_above(thresholds.lambda1);
    match (unique, all_above, fl_mode) {
        (Some((k, l)), _, _) => Some(UnknownKVerdict {
            decided: HypothesisIndex::Match { k, l },
            stopping_time: n,
            fired_event: FiredEvent::UniqueLow { k, l },
            score_summary: grouped.summary(),
            thresholds: *thresholds,
        }),
        (None, true, false) => Some(UnknownKVerdict {
            decided: HypothesisIndex::Reject,
            stopping_time: n,
            fired_event: FiredEvent::AllAbove,
            score_summary: grouped.summary(),
            thresholds: *thresholds,
        }),
        (None, _, true) => Some(UnknownKVerdict {
            decided: HypothesisIndex::Reject,
            stopping_time: n,
            fired_event: FiredEvent::NoUniqueLow,
            score_summary: grouped.summary(),
            thresholds: *thresholds,
        }),
        (None, false, false) => None,
    }
}

/// Runs the sequential test: starting at `n = N-1`, stop at the first time
/// either the no-match event holds or exactly one low-score event fires;
/// decide that unique hypothesis, otherwise reject.
pub fn run_sequential_unknown<S: SnapshotSource>(
    source: &mut S,
    dims: &ProblemDims,
    rates: &Rates,
    thresholds: &Thresholds,
    horizon_n: u64,
    max_steps: u64,
) -> Result<UnknownKVerdict> {
    if horizon_n < 2 {
        return Err(Error::Domain(format!("horizon N must be at least 2, got {horizon_n}")));
    }
    let grouped = group_hypotheses(dims)?;
    let mut steps: u64 = 0;
    let mut n = horizon_n - 1;
    loop {
        steps += 1;
        if steps > max_steps {
            return Err(Error::Truncated { steps: max_steps, n });
        }
        let snapshot = source.at(n)?;
        let table = ScoreTable::build(snapshot, rates)?;
        let scores = GroupedScores::compute(&table, &grouped);
        if let Some(v) = verdict_at(&scores, n, thresholds, false) {
            return Ok(v);
        }
        n += 1;
    }
}

/// The one-step fixed-length test at a single snapshot: decide the unique
/// low-score hypothesis if there is one, otherwise reject.
///
/// Only two of the three thresholds play a role here: the acceptance bound
/// `lambda2` and the separation bound `lambda3` (the same roles they have in
/// the sequential test); `lambda1` is unused.
pub fn run_fixed_length_unknown(
    snapshot: &DatabaseSnapshot,
    dims: &ProblemDims,
    rates: &Rates,
    thresholds: &Thresholds,
) -> Result<UnknownKVerdict> {
    let grouped = group_hypotheses(dims)?;
    let table = ScoreTable::build(snapshot, rates)?;
    let scores = GroupedScores::compute(&table, &grouped);
    Ok(verdict_at(&scores, snapshot.n, thresholds, true)
        .expect("fixed-length verdict is always defined"))
}

/// Re-checks a non-reject verdict against its own score summary: the decided
/// hypothesis must be the unique one whose low-score event fires.
pub fn verify_decision_soundness(verdict: &UnknownKVerdict) -> bool {
    match verdict.decided {
        HypothesisIndex::Reject => true,
        HypothesisIndex::Match { k, l } => {
            let th = &verdict.thresholds;
            let mut firing = Vec::new();
            for e in &verdict.score_summary {
                let b1 = e.score <= th.lambda2;
                let others_min = verdict
                    .score_summary
                    .iter()
                    .filter(|o| o.k == e.k && o.l != e.l)
                    .map(|o| o.score)
                    .fold(f64::INFINITY, f64::min);
                if b1 && others_min > th.lambda3 {
                    firing.push((e.k, e.l));
                }
            }
            firing == vec![(k, l)]
        }
    }
}
