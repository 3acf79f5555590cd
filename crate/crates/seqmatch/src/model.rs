//! Generating models: the distributions behind both databases plus the
//! hypothesis they satisfy.

use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, Rates};
use crate::error::{Error, Result};
use crate::hypothesis::{enumerate_matchings, HypothesisIndex, MatchingSet, ProblemDims};

/// Componentwise tolerance within which two model distributions count as
/// equal for membership checks.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-12;

/// A tuple of generating distributions together with the true hypothesis.
///
/// Membership invariants, enforced at construction:
/// under a match hypothesis `(K, l)`, `P_i = Q_j` exactly for the matched
/// pairs and `P_i != Q_j` otherwise; under the no-match hypothesis all cross
/// pairs differ. Within each database the distributions are pairwise distinct.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceModel {
    pub dims: ProblemDims,
    pub left_dists: Vec<Distribution>,
    pub right_dists: Vec<Distribution>,
    pub truth: HypothesisIndex,
    pub rates: Rates,
}

impl SourceModel {
    pub fn new(
        dims: ProblemDims,
        left_dists: Vec<Distribution>,
        right_dists: Vec<Distribution>,
        truth: HypothesisIndex,
        rates: Rates,
    ) -> Result<Self> {
        let model = Self {
            dims,
            left_dists,
            right_dists,
            truth,
            rates,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.left_dists.len() != self.dims.m1 {
            return Err(Error::Model(format!(
                "expected {} left distributions, got {}",
                self.dims.m1,
                self.left_dists.len()
            )));
        }
        if self.right_dists.len() != self.dims.m2 {
            return Err(Error::Model(format!(
                "expected {} right distributions, got {}",
                self.dims.m2,
                self.right_dists.len()
            )));
        }
        let alphabet = self.left_dists[0].alphabet_size();
        for d in self.left_dists.iter().chain(&self.right_dists) {
            if d.alphabet_size() != alphabet {
                return Err(Error::Model("all distributions must share one alphabet".into()));
            }
        }
        let eq = |a: &Distribution, b: &Distribution| a.approx_eq(b, MEMBERSHIP_TOLERANCE);
        for (i, a) in self.left_dists.iter().enumerate() {
            for b in self.left_dists.iter().skip(i + 1) {
                if eq(a, b) {
                    return Err(Error::Model(
                        "left-database distributions must be pairwise distinct".into(),
                    ));
                }
            }
        }
        for (j, a) in self.right_dists.iter().enumerate() {
            for b in self.right_dists.iter().skip(j + 1) {
                if eq(a, b) {
                    return Err(Error::Model(
                        "right-database distributions must be pairwise distinct".into(),
                    ));
                }
            }
        }
        match self.truth {
            HypothesisIndex::Reject => {
                for (i, p) in self.left_dists.iter().enumerate() {
                    for (j, q) in self.right_dists.iter().enumerate() {
                        if eq(p, q) {
                            return Err(Error::Model(format!(
                                "no-match model has equal pair ({}, {})",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
            }
            HypothesisIndex::Match { k, l } => {
                let matching = self.truth_matching()?;
                let _ = (k, l);
                for (i, p) in self.left_dists.iter().enumerate() {
                    for (j, q) in self.right_dists.iter().enumerate() {
                        let matched = matching.contains((i, j));
                        if matched && !eq(p, q) {
                            return Err(Error::Model(format!(
                                "matched pair ({}, {}) has unequal distributions",
                                i + 1,
                                j + 1
                            )));
                        }
                        if !matched && eq(p, q) {
                            return Err(Error::Model(format!(
                                "unmatched pair ({}, {}) has equal distributions",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The matching named by `truth`; errors under the no-match hypothesis.
    pub fn truth_matching(&self) -> Result<MatchingSet> {
        match self.truth {
            HypothesisIndex::Reject => Err(Error::Model(
                "no-match model has no truth matching".into(),
            )),
            HypothesisIndex::Match { k, l } => {
                let all = enumerate_matchings(&self.dims, k)?;
                all.into_iter().nth(l).ok_or_else(|| {
                    Error::IndexOutOfRange(format!("hypothesis index l = {} for k = {k}", l + 1))
                })
            }
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.left_dists[0].alphabet_size()
    }

    pub fn is_null(&self) -> bool {
        self.truth.is_reject()
    }
}
