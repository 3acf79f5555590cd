//! The space of matching hypotheses between two databases: a hypothesis is a
//! partial injective pairing of left-database indices to right-database
//! indices. Indices are 0-based internally and 1-based in serialized I/O.

use serde::de::Error as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Matchings whose total hypothesis count exceeds this are rejected at
/// config parse; the simulator scores every hypothesis per time step.
pub const MAX_TOTAL_HYPOTHESES: u128 = 1_000_000;

/// Database sizes. The convention throughout is `m1 >= m2 >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemDims {
    pub m1: usize,
    pub m2: usize,
}

impl ProblemDims {
    pub fn new(m1: usize, m2: usize) -> Result<Self> {
        if m1 < m2 || m2 < 1 {
            return Err(Error::Domain(format!(
                "database sizes must satisfy m1 >= m2 >= 1, got ({m1}, {m2})"
            )));
        }
        Ok(Self { m1, m2 })
    }
}

/// One matching hypothesis: `k` pairs `(i, j)` with all `i` distinct and all
/// `j` distinct. Pairs are stored sorted lexicographically, so equality is
/// set equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatchingSet {
    pairs: Vec<(usize, usize)>,
}

impl MatchingSet {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Domain("a matching must contain at least one pair".into()));
        }
        pairs.sort_unstable();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Domain(format!(
                    "left index {} appears twice",
                    w[0].0
                )));
            }
        }
        let mut right: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        right.sort_unstable();
        for w in right.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Domain(format!("right index {} appears twice", w[0])));
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Number of matched pairs.
    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    /// Left-database indices covered by this matching.
    pub fn matched_left(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    /// Right-database indices covered by this matching (sorted).
    pub fn matched_right(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.pairs.iter().map(|p| p.1).collect();
        v.sort_unstable();
        v
    }

    pub fn contains(&self, pair: (usize, usize)) -> bool {
        self.pairs.binary_search(&pair).is_ok()
    }

    pub fn fits(&self, dims: &ProblemDims) -> bool {
        self.pairs
            .iter()
            .all(|&(i, j)| i < dims.m1 && j < dims.m2)
    }
}

/// Pairs of `a` that are not in `b`.
pub fn set_difference(a: &MatchingSet, b: &MatchingSet) -> Vec<(usize, usize)> {
    a.pairs
        .iter()
        .copied()
        .filter(|p| !b.contains(*p))
        .collect()
}

/// True iff every pair of `a` is a pair of `b`.
pub fn is_submatching(a: &MatchingSet, b: &MatchingSet) -> bool {
    a.pairs.iter().all(|p| b.contains(*p))
}

// 1-based [i, j] pair lists on the wire.
impl Serialize for MatchingSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let external: Vec<[usize; 2]> = self.pairs.iter().map(|&(i, j)| [i + 1, j + 1]).collect();
        external.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MatchingSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let external = Vec::<[usize; 2]>::deserialize(deserializer)?;
        let pairs: Vec<(usize, usize)> = external
            .iter()
            .map(|&[i, j]| {
                if i == 0 || j == 0 {
                    Err(D::Error::custom("matching pairs are 1-based"))
                } else {
                    Ok((i - 1, j - 1))
                }
            })
            .collect::<std::result::Result<_, _>>()?;
        MatchingSet::new(pairs).map_err(D::Error::custom)
    }
}

/// Either a specific hypothesis, addressed by its match count `k` and its
/// 0-based position `l` in the canonical enumeration, or the no-match verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HypothesisIndex {
    Match { k: usize, l: usize },
    Reject,
}

impl HypothesisIndex {
    pub fn is_reject(&self) -> bool {
        matches!(self, HypothesisIndex::Reject)
    }
}

// "reject" or {"k": k, "l": l} with 1-based l on the wire.
impl Serialize for HypothesisIndex {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            HypothesisIndex::Reject => serializer.serialize_str("reject"),
            HypothesisIndex::Match { k, l } => {
                use serde::ser::SerializeStruct;
                let mut s = serializer.serialize_struct("HypothesisIndex", 2)?;
                s.serialize_field("k", k)?;
                s.serialize_field("l", &(l + 1))?;
                s.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for HypothesisIndex {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Tag(String),
            Index { k: usize, l: usize },
        }
        match Wire::deserialize(deserializer)? {
            Wire::Tag(s) if s == "reject" => Ok(HypothesisIndex::Reject),
            Wire::Tag(s) => Err(D::Error::custom(format!("unknown hypothesis tag {s:?}"))),
            Wire::Index { k, l } => {
                if l == 0 {
                    return Err(D::Error::custom("hypothesis index l is 1-based"));
                }
                Ok(HypothesisIndex::Match { k, l: l - 1 })
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

fn factorial(k: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 2..=k {
        acc = acc.checked_mul(i as u128)?;
    }
    Some(acc)
}

/// Number of `k`-matchings: `C(m1,k) · C(m2,k) · k!`, in exact integer
/// arithmetic with overflow detection.
pub fn count_hypotheses(dims: &ProblemDims, k: usize) -> Result<u128> {
    if k < 1 || k > dims.m2 {
        return Err(Error::Domain(format!(
            "match count k = {k} outside [1, {}]",
            dims.m2
        )));
    }
    let overflow = || Error::TooManyHypotheses {
        total: u128::MAX,
        limit: MAX_TOTAL_HYPOTHESES,
    };
    binomial(dims.m1, k)
        .and_then(|a| binomial(dims.m2, k).and_then(|b| a.checked_mul(b)))
        .and_then(|ab| factorial(k).and_then(|f| ab.checked_mul(f)))
        .ok_or_else(overflow)
}

/// Total number of hypotheses with at least one match: `Σ_k T_k`.
pub fn count_all(dims: &ProblemDims) -> Result<u128> {
    let mut total: u128 = 0;
    for k in 1..=dims.m2 {
        total = total
            .checked_add(count_hypotheses(dims, k)?)
            .ok_or(Error::TooManyHypotheses {
                total: u128::MAX,
                limit: MAX_TOTAL_HYPOTHESES,
            })?;
    }
    Ok(total)
}

/// Rejects dimension choices whose full hypothesis space is too large to
/// enumerate per step.
pub fn check_enumerable(dims: &ProblemDims) -> Result<()> {
    let total = count_all(dims)?;
    if total > MAX_TOTAL_HYPOTHESES {
        return Err(Error::TooManyHypotheses {
            total,
            limit: MAX_TOTAL_HYPOTHESES,
        });
    }
    Ok(())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() == 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (idx, &head) in items.iter().enumerate() {
        let rest: Vec<usize> = items
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, &v)| v)
            .collect();
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// All `k`-matchings in canonical order: pair lists sorted lexicographically,
/// hypotheses ordered by that list. The position of a matching in this list
/// defines its index `l`.
pub fn enumerate_matchings(dims: &ProblemDims, k: usize) -> Result<Vec<MatchingSet>> {
    let expected = count_hypotheses(dims, k)?;
    if expected > MAX_TOTAL_HYPOTHESES {
        return Err(Error::TooManyHypotheses {
            total: expected,
            limit: MAX_TOTAL_HYPOTHESES,
        });
    }
    let mut out = Vec::with_capacity(expected as usize);
    for left in combinations(dims.m1, k) {
        for right in combinations(dims.m2, k) {
            for perm in permutations(&right) {
                let pairs: Vec<(usize, usize)> =
                    left.iter().copied().zip(perm.iter().copied()).collect();
                out.push(MatchingSet::new(pairs).expect("construction yields injective pairs"));
            }
        }
    }
    out.sort_unstable_by(|a, b| a.pairs.cmp(&b.pairs));
    debug_assert_eq!(out.len() as u128, expected);
    Ok(out)
}

/// Concatenation of `enumerate_matchings` over `k = 1..=m2`, each entry
/// tagged with its `(k, l)` address.
pub fn enumerate_all(dims: &ProblemDims) -> Result<Vec<(usize, usize, MatchingSet)>> {
    check_enumerable(dims)?;
    let mut out = Vec::new();
    for k in 1..=dims.m2 {
        for (l, m) in enumerate_matchings(dims, k)?.into_iter().enumerate() {
            out.push((k, l, m));
        }
    }
    Ok(out)
}

/// Looks up the canonical `(k, l)` address of a matching.
pub fn index_of(dims: &ProblemDims, m: &MatchingSet) -> Result<HypothesisIndex> {
    let k = m.k();
    let all = enumerate_matchings(dims, k)?;
    all.iter()
        .position(|c| c == m)
        .map(|l| HypothesisIndex::Match { k, l })
        .ok_or_else(|| Error::IndexOutOfRange(format!("matching {:?} does not fit dims", m.pairs)))
}
