//! Scoring of database snapshots against matching hypotheses, and the
//! threshold schedules the sequential tests compare scores to.

use crate::dist::{gjs, Distribution, EmpiricalType, Rates};
use crate::error::{Error, Result};
use crate::hypothesis::MatchingSet;

/// The state of both databases at nominal time `n`: one empirical type per
/// sequence, left types of length `⌈α·n⌉` and right types of length `⌈β·n⌉`.
#[derive(Debug, Clone)]
pub struct DatabaseSnapshot {
    pub left: Vec<EmpiricalType>,
    pub right: Vec<EmpiricalType>,
    pub n: u64,
}

impl DatabaseSnapshot {
    pub fn check_lengths(&self, rates: &Rates) -> Result<()> {
        let xi = rates.xi(self.n);
        let chi = rates.chi(self.n);
        for t in &self.left {
            if t.len() != xi {
                return Err(Error::Domain(format!(
                    "left type length {} != ceil(alpha*n) = {xi}",
                    t.len()
                )));
            }
        }
        for t in &self.right {
            if t.len() != chi {
                return Err(Error::Domain(format!(
                    "right type length {} != ceil(beta*n) = {chi}",
                    t.len()
                )));
            }
        }
        Ok(())
    }

    fn left_distributions(&self) -> Result<Vec<Distribution>> {
        self.left.iter().map(|t| t.as_distribution()).collect()
    }

    fn right_distributions(&self) -> Result<Vec<Distribution>> {
        self.right.iter().map(|t| t.as_distribution()).collect()
    }
}

/// Sum of pairwise GJS divergences over the pairs of a matching.
pub fn g_combined(
    dists_left: &[Distribution],
    dists_right: &[Distribution],
    m: &MatchingSet,
    rates: &Rates,
) -> Result<f64> {
    let mut sum = 0.0;
    for &(i, j) in m.pairs() {
        let p = dists_left
            .get(i)
            .ok_or_else(|| Error::IndexOutOfRange(format!("left index {i}")))?;
        let q = dists_right
            .get(j)
            .ok_or_else(|| Error::IndexOutOfRange(format!("right index {j}")))?;
        sum += gjs(p, q, rates)?;
    }
    Ok(sum)
}

/// The scoring function: `g_combined` evaluated at the snapshot's empirical
/// distributions.
pub fn score(snapshot: &DatabaseSnapshot, m: &MatchingSet, rates: &Rates) -> Result<f64> {
    let left = snapshot.left_distributions()?;
    let right = snapshot.right_distributions()?;
    g_combined(&left, &right, m, rates)
}

/// All pairwise empirical GJS values of one snapshot, computed once per time
/// step. Every hypothesis score is a sum of entries, so the per-step cost is
/// `M1·M2` divergences no matter how many hypotheses are scored.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    pairwise: Vec<Vec<f64>>,
}

impl ScoreTable {
    pub fn build(snapshot: &DatabaseSnapshot, rates: &Rates) -> Result<Self> {
        let left = snapshot.left_distributions()?;
        let right = snapshot.right_distributions()?;
        let pairwise = left
            .iter()
            .map(|p| right.iter().map(|q| gjs(p, q, rates)).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { pairwise })
    }

    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.pairwise[i][j]
    }

    pub fn score(&self, m: &MatchingSet) -> f64 {
        m.pairs().iter().map(|&(i, j)| self.pairwise[i][j]).sum()
    }

    /// Scores of a hypothesis list, in list order.
    pub fn scores<'a, I>(&self, hypotheses: I) -> Vec<f64>
    where
        I: IntoIterator<Item = &'a MatchingSet>,
    {
        hypotheses.into_iter().map(|m| self.score(m)).collect()
    }
}

/// A growing pair of databases, addressed by nominal time. Implementations
/// must be replay-deterministic: the snapshot at time `n` does not depend on
/// which earlier times were observed.
pub trait SnapshotSource {
    /// Advances to time `n` (non-decreasing across calls) and returns the
    /// snapshot. Left sequences hold `⌈α·n⌉` samples, right `⌈β·n⌉`.
    fn at(&mut self, n: u64) -> Result<&DatabaseSnapshot>;

    fn rates(&self) -> &Rates;
}

/// A snapshot source backed by fully materialized symbol sequences, for
/// file-loaded data and hand-built fixtures.
#[derive(Debug, Clone)]
pub struct ArraySource {
    left: Vec<Vec<usize>>,
    right: Vec<Vec<usize>>,
    rates: Rates,
    snapshot: DatabaseSnapshot,
}

impl ArraySource {
    pub fn new(
        left: Vec<Vec<usize>>,
        right: Vec<Vec<usize>>,
        alphabet_size: usize,
        rates: Rates,
    ) -> Self {
        let snapshot = DatabaseSnapshot {
            left: vec![EmpiricalType::new(alphabet_size); left.len()],
            right: vec![EmpiricalType::new(alphabet_size); right.len()],
            n: 0,
        };
        Self {
            left,
            right,
            rates,
            snapshot,
        }
    }
}

impl SnapshotSource for ArraySource {
    fn at(&mut self, n: u64) -> Result<&DatabaseSnapshot> {
        if n < self.snapshot.n {
            return Err(Error::Domain(format!(
                "snapshot time must be non-decreasing: {} after {}",
                n, self.snapshot.n
            )));
        }
        let xi = self.rates.xi(n) as usize;
        let chi = self.rates.chi(n) as usize;
        for (seq, t) in self.left.iter().zip(self.snapshot.left.iter_mut()) {
            if seq.len() < xi {
                return Err(Error::Domain(format!(
                    "left sequence exhausted: need {xi} samples, have {}",
                    seq.len()
                )));
            }
            for &s in &seq[t.len() as usize..xi] {
                t.push(s);
            }
        }
        for (seq, t) in self.right.iter().zip(self.snapshot.right.iter_mut()) {
            if seq.len() < chi {
                return Err(Error::Domain(format!(
                    "right sequence exhausted: need {chi} samples, have {}",
                    seq.len()
                )));
            }
            for &s in &seq[t.len() as usize..chi] {
                t.push(s);
            }
        }
        self.snapshot.n = n;
        Ok(&self.snapshot)
    }

    fn rates(&self) -> &Rates {
        &self.rates
    }
}

/// The vanishing stopping threshold for the known-match-count sequential
/// test: `((k+1)·|X|·log(nα+2) + k·|X|·log(nβ+2)) / n`.
pub fn stop_threshold(n: u64, k: usize, alphabet_size: usize, rates: &Rates) -> f64 {
    let nf = n as f64;
    let x = alphabet_size as f64;
    ((k as f64 + 1.0) * x * (nf * rates.alpha + 2.0).ln()
        + k as f64 * x * (nf * rates.beta + 2.0).ln())
        / nf
}

/// The per-sample log cost of counting types:
/// `(n2·|X|·log(n1·α+2) + n3·|X|·log(n1·β+2)) / n1`. Used in analysis
/// cross-checks, not by the tests themselves.
pub fn type_log_penalty(n1: u64, n2: u64, n3: u64, alphabet_size: usize, rates: &Rates) -> f64 {
    let nf = n1 as f64;
    let x = alphabet_size as f64;
    (n2 as f64 * x * (nf * rates.alpha + 2.0).ln() + n3 as f64 * x * (nf * rates.beta + 2.0).ln())
        / nf
}
