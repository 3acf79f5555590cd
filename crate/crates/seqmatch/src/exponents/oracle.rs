//! Brute-force grid oracle for validating the constrained solver on binary
//! alphabets: an exhaustive product scan over the free simplex factors.
//!
//! Reductions applied before scanning:
//! - factors named by no constraint stay at their data distributions;
//! - a pair whose two references coincide and whose factors appear in no
//!   other constraint pair is pinned to the common distribution whenever the
//!   pair enters only positively — moving it could only raise the cost and
//!   every constraint's left-hand side.
//!
//! After reductions at most three free factors are scanned (401 grid points
//! each by default); larger instances are refused.

use crate::dist::{gjs, kl, Distribution, Rates};
use crate::error::{Error, Result};

use super::solver::{Constraint, SUPPORT_SMOOTHING};

pub const DEFAULT_GRID_POINTS: usize = 401;
const MAX_FREE_FACTORS: usize = 3;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub value: f64,
    pub left: Vec<Distribution>,
    pub right: Vec<Distribution>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Factor {
    Left(usize),
    Right(usize),
}

/// Exhaustive minimization of the weighted KL objective under the given
/// constraints, on binary alphabets only.
pub fn grid_kernel(
    left: &[Distribution],
    right: &[Distribution],
    rates: &Rates,
    constraints: &[Constraint],
    points: usize,
) -> Result<OracleResult> {
    if left.iter().chain(right).any(|d| d.alphabet_size() != 2) {
        return Err(Error::Domain("grid oracle requires a binary alphabet".into()));
    }
    if points < 3 {
        return Err(Error::Domain("grid oracle needs at least 3 points".into()));
    }
    let left_ref: Vec<Distribution> = left.iter().map(|d| d.smoothed(SUPPORT_SMOOTHING)).collect();
    let right_ref: Vec<Distribution> =
        right.iter().map(|d| d.smoothed(SUPPORT_SMOOTHING)).collect();

    // Count appearances of each factor across all constraint pairs.
    let mut uses: std::collections::HashMap<Factor, usize> = std::collections::HashMap::new();
    for c in constraints {
        for &(i, j) in c.plus.iter().chain(&c.minus) {
            *uses.entry(Factor::Left(i)).or_insert(0) += 1;
            *uses.entry(Factor::Right(j)).or_insert(0) += 1;
        }
    }

    // Pin matched, positively-entering, otherwise-unused pairs.
    let mut pinned_pairs: Vec<(usize, usize)> = Vec::new();
    for c in constraints {
        for &(i, j) in &c.plus {
            let matched = left_ref[i].approx_eq(&right_ref[j], 1e-9);
            let single_use =
                uses[&Factor::Left(i)] == 1 && uses[&Factor::Right(j)] == 1;
            if matched && single_use && !pinned_pairs.contains(&(i, j)) {
                pinned_pairs.push((i, j));
            }
        }
    }
    let is_pinned = |i: usize, j: usize| pinned_pairs.contains(&(i, j));

    // Free factors: in some constraint and not pinned away.
    let mut free: Vec<Factor> = Vec::new();
    for c in constraints {
        for &(i, j) in c.plus.iter().chain(&c.minus) {
            if is_pinned(i, j) {
                continue;
            }
            for f in [Factor::Left(i), Factor::Right(j)] {
                if !free.contains(&f) {
                    free.push(f);
                }
            }
        }
    }
    free.sort_by_key(|f| match f {
        Factor::Left(i) => (0, *i),
        Factor::Right(j) => (1, *j),
    });
    if free.len() > MAX_FREE_FACTORS {
        return Err(Error::Domain(format!(
            "grid oracle limited to {MAX_FREE_FACTORS} free factors, needs {}",
            free.len()
        )));
    }

    let grid: Vec<Distribution> = (0..points)
        .map(|g| Distribution::bernoulli(g as f64 / (points - 1) as f64).unwrap())
        .collect();

    // Per-factor cost rows over the grid.
    let cost_row = |f: Factor| -> Vec<f64> {
        grid.iter()
            .map(|v| match f {
                Factor::Left(i) => rates.alpha * kl(v, &left_ref[i]).unwrap(),
                Factor::Right(j) => rates.beta * kl(v, &right_ref[j]).unwrap(),
            })
            .collect()
    };
    let costs: Vec<Vec<f64>> = free.iter().map(|&f| cost_row(f)).collect();

    let slot_of = |f: Factor| free.iter().position(|&x| x == f);

    // Evaluate one assignment of grid indices to free slots.
    let dist_at = |f: Factor, assign: &[usize]| -> &Distribution {
        match slot_of(f) {
            Some(s) => &grid[assign[s]],
            None => match f {
                Factor::Left(i) => &left_ref[i],
                Factor::Right(j) => &right_ref[j],
            },
        }
    };
    let feasible = |assign: &[usize]| -> bool {
        constraints.iter().all(|c| {
            let mut v = 0.0;
            for &(i, j) in &c.plus {
                if is_pinned(i, j) {
                    continue;
                }
                v += gjs(
                    dist_at(Factor::Left(i), assign),
                    dist_at(Factor::Right(j), assign),
                    rates,
                )
                .unwrap();
            }
            for &(i, j) in &c.minus {
                v -= gjs(
                    dist_at(Factor::Left(i), assign),
                    dist_at(Factor::Right(j), assign),
                    rates,
                )
                .unwrap();
            }
            v <= c.bound + 1e-12
        })
    };

    let mut best_value = f64::INFINITY;
    let mut best_assign: Option<Vec<usize>> = None;
    let mut assign = vec![0usize; free.len()];
    scan(
        0,
        0.0,
        points,
        &costs,
        &mut assign,
        &mut best_value,
        &mut best_assign,
        &feasible,
    );

    let best_assign = best_assign.ok_or_else(|| {
        Error::Domain("grid oracle found no feasible point; refine the grid".into())
    })?;

    let mut out_left = left_ref.clone();
    let mut out_right = right_ref.clone();
    for (slot, &f) in free.iter().enumerate() {
        match f {
            Factor::Left(i) => out_left[i] = grid[best_assign[slot]].clone(),
            Factor::Right(j) => out_right[j] = grid[best_assign[slot]].clone(),
        }
    }
    Ok(OracleResult {
        value: best_value,
        left: out_left,
        right: out_right,
    })
}

#[allow(clippy::too_many_arguments)]
fn scan(
    slot: usize,
    cost_so_far: f64,
    points: usize,
    costs: &[Vec<f64>],
    assign: &mut Vec<usize>,
    best_value: &mut f64,
    best_assign: &mut Option<Vec<usize>>,
    feasible: &dyn Fn(&[usize]) -> bool,
) {
    if slot == costs.len() {
        if cost_so_far < *best_value && feasible(assign) {
            *best_value = cost_so_far;
            *best_assign = Some(assign.clone());
        }
        return;
    }
    for g in 0..points {
        let c = cost_so_far + costs[slot][g];
        if c >= *best_value {
            continue;
        }
        assign[slot] = g;
        scan(
            slot + 1,
            c,
            points,
            costs,
            assign,
            best_value,
            best_assign,
            feasible,
        );
    }
}

/// Grid evaluation of the hard-equality form: every pair of `pairs` must
/// coincide, pairs are vertex-disjoint, so each collapses independently onto
/// a common grid distribution.
pub fn grid_equality_collapse(
    left: &[Distribution],
    right: &[Distribution],
    rates: &Rates,
    pairs: &[(usize, usize)],
    points: usize,
) -> Result<f64> {
    if left.iter().chain(right).any(|d| d.alphabet_size() != 2) {
        return Err(Error::Domain("grid oracle requires a binary alphabet".into()));
    }
    let mut total = 0.0;
    for &(i, j) in pairs {
        let p = left[i].smoothed(SUPPORT_SMOOTHING);
        let q = right[j].smoothed(SUPPORT_SMOOTHING);
        let mut best = f64::INFINITY;
        for g in 0..points {
            let v = Distribution::bernoulli(g as f64 / (points - 1) as f64).unwrap();
            let val = rates.alpha * kl(&v, &p)? + rates.beta * kl(&v, &q)?;
            best = best.min(val);
        }
        total += best;
    }
    Ok(total)
}

/// Grid minimization of `a·D(V‖P) + D(V‖Q)` over the binary simplex.
pub fn grid_weighted_kl_min(
    p: &Distribution,
    q: &Distribution,
    a: f64,
    points: usize,
) -> Result<f64> {
    if p.alphabet_size() != 2 || q.alphabet_size() != 2 {
        return Err(Error::Domain("grid oracle requires a binary alphabet".into()));
    }
    let mut best = f64::INFINITY;
    for g in 0..points {
        let v = Distribution::bernoulli(g as f64 / (points - 1) as f64).unwrap();
        let val = a * kl(&v, p)? + kl(&v, q)?;
        best = best.min(val);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::renyi;

    fn bern(p: f64) -> Distribution {
        Distribution::bernoulli(p).unwrap()
    }

    fn unit_rates() -> Rates {
        Rates::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn oracle_rejects_nonbinary_and_oversize() {
        let t = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(grid_kernel(
            &[t.clone()],
            &[t],
            &unit_rates(),
            &[Constraint::upper(vec![(0, 0)], 0.1)],
            101,
        )
        .is_err());

        // Four distinct unmatched factors exceed the free-factor limit.
        let left = vec![bern(0.1), bern(0.3)];
        let right = vec![bern(0.6), bern(0.9)];
        let c = Constraint::upper(vec![(0, 0), (1, 1)], 0.1);
        assert!(grid_kernel(&left, &right, &unit_rates(), &[c], 101).is_err());
    }

    #[test]
    fn matched_pairs_are_pinned_away() {
        // (0,0) matched: only (1,1)'s factors stay free, so the scan runs.
        let left = vec![bern(0.2), bern(0.6)];
        let right = vec![bern(0.2), bern(0.9)];
        let c = Constraint::upper(vec![(0, 0), (1, 1)], 0.01);
        let got = grid_kernel(&left, &right, &unit_rates(), &[c], 201).unwrap();
        assert!(got.value > 0.0);
        assert!(got.left[0].approx_eq(&bern(0.2).smoothed(SUPPORT_SMOOTHING), 1e-12));
    }

    #[test]
    fn equality_collapse_matches_renyi() {
        let left = vec![bern(0.25)];
        let right = vec![bern(0.7)];
        let rates = Rates::new(1.0, 2.0).unwrap();
        let grid = grid_equality_collapse(&left, &right, &rates, &[(0, 0)], 2001).unwrap();
        let exact = rates.alpha * renyi(&bern(0.7), &bern(0.25), rates.beta / rates.total()).unwrap();
        assert!((grid - exact).abs() <= 1e-4, "grid={grid}, exact={exact}");
    }

    #[test]
    fn weighted_kl_grid_matches_renyi_variational_form() {
        for a in [0.5, 1.0, 2.0] {
            let p = bern(0.3);
            let q = bern(0.65);
            let grid = grid_weighted_kl_min(&p, &q, a, 2001).unwrap();
            let exact = renyi(&p, &q, a / (1.0 + a)).unwrap();
            assert!((grid - exact).abs() <= 1e-4);
        }
    }
}
