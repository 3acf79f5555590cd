//! Built-in reference checks: fixed models with externally known values for
//! the floors, exponents, and identities. The `verify-paper` CLI subcommand
//! runs this checklist and reports expected vs computed per line.

use serde::Serialize;

use crate::dist::{renyi, Distribution, Rates};
use crate::error::Result;
use crate::exponents::{
    self, ambiguity_exponent, competitor_floor, disjoint_extension_floor, false_alarm_exponent,
    grid_weighted_kl_min, min_pair_gjs, mismatch_exponent_fixed, mismatch_exponent_sequential,
    overestimate_exponent, overmatch_floor,
};
use crate::hypothesis::{count_hypotheses, enumerate_all, index_of, MatchingSet, ProblemDims};
use crate::model::SourceModel;
use crate::scoring::g_combined;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

impl CheckResult {
    fn numeric(name: &str, expected: f64, computed: f64, tol: f64) -> Self {
        Self {
            name: name.to_string(),
            expected: format!("{expected:.6} +- {tol}"),
            computed: format!("{computed:.6}"),
            pass: (computed - expected).abs() <= tol,
        }
    }

    fn boolean(name: &str, expected: &str, computed: String, pass: bool) -> Self {
        Self {
            name: name.to_string(),
            expected: expected.to_string(),
            computed,
            pass,
        }
    }
}

fn bern_model(
    dims: (usize, usize),
    left: &[f64],
    right: &[f64],
    truth_pairs: Option<&[(usize, usize)]>,
) -> SourceModel {
    let dims = ProblemDims::new(dims.0, dims.1).expect("reference dims are valid");
    let truth = match truth_pairs {
        None => crate::hypothesis::HypothesisIndex::Reject,
        Some(pairs) => {
            let m = MatchingSet::new(pairs.to_vec()).expect("reference matching is valid");
            index_of(&dims, &m).expect("reference matching fits dims")
        }
    };
    SourceModel::new(
        dims,
        left.iter().map(|&p| Distribution::bernoulli(p).unwrap()).collect(),
        right.iter().map(|&p| Distribution::bernoulli(p).unwrap()).collect(),
        truth,
        Rates::new(1.0, 1.0).unwrap(),
    )
    .expect("reference models satisfy membership")
}

/// Reference model A: two genuinely matched pairs whose best same-count
/// competitor swaps two near-identical sequences, giving a competitor floor
/// of about 0.002.
pub fn reference_model_a() -> SourceModel {
    bern_model(
        (4, 3),
        &[0.1, 0.12, 0.3, 0.6],
        &[0.1, 0.12, 0.4],
        Some(&[(0, 0), (1, 1)]),
    )
}

/// Reference model B: the overmatch floor (about 0.0438) is achieved by a
/// rearranged three-pair matching, strictly below the naive one-extra-pair
/// floor (about 0.0806).
pub fn reference_model_b() -> SourceModel {
    bern_model(
        (4, 3),
        &[0.1, 0.3, 0.15, 0.8],
        &[0.1, 0.3, 0.4],
        Some(&[(0, 0), (1, 1)]),
    )
}

/// Compact no-match model for false-alarm checks.
pub fn reference_null_model() -> SourceModel {
    bern_model((2, 2), &[0.15, 0.6], &[0.35, 0.85], None)
}

/// Compact matched model for the ambiguity and overestimation checks.
pub fn reference_small_matched() -> SourceModel {
    bern_model((2, 2), &[0.2, 0.7], &[0.2, 0.5], Some(&[(0, 0)]))
}

/// The competitor-floor check against model A, exposed separately so a
/// perturbed model can serve as a negative control.
pub fn competitor_floor_check(model: &SourceModel) -> Result<CheckResult> {
    let floor = competitor_floor(model)?;
    let minimizer_ok = floor
        .minimizer
        .as_ref()
        .map(|m| m.pairs() == [(0, 1), (1, 0)])
        .unwrap_or(false);
    let value = floor.value.as_f64();
    let value_ok = (value - 0.002).abs() <= 5e-4;
    Ok(CheckResult::boolean(
        "competitor floor (model A)",
        "0.002 +- 5e-4, minimizer {(1,2),(2,1)}",
        format!("{value:.6}, minimizer {:?}", floor.minimizer.map(|m| m.pairs().to_vec())),
        value_ok && minimizer_ok,
    ))
}

/// Runs every reference check. All should pass on a healthy build.
pub fn run_reference_checks() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    // Hypothesis counting.
    let d32 = ProblemDims::new(3, 2)?;
    let d42 = ProblemDims::new(4, 2)?;
    out.push(CheckResult::boolean(
        "hypothesis count (3,2,1)",
        "6",
        count_hypotheses(&d32, 1)?.to_string(),
        count_hypotheses(&d32, 1)? == 6,
    ));
    out.push(CheckResult::boolean(
        "hypothesis count (4,2,2)",
        "12",
        count_hypotheses(&d42, 2)?.to_string(),
        count_hypotheses(&d42, 2)? == 12,
    ));

    // Model A: competitor floor.
    let a = reference_model_a();
    out.push(competitor_floor_check(&a)?);

    // Model B: overmatch floor, naive extension floor, strict gap.
    let b = reference_model_b();
    let kappa = overmatch_floor(&b)?;
    let kappa_min_ok = kappa
        .minimizer
        .as_ref()
        .map(|m| m.pairs() == [(0, 0), (1, 2), (2, 1)])
        .unwrap_or(false);
    out.push(CheckResult::boolean(
        "overmatch floor (model B)",
        "0.0438 +- 1e-3, minimizer {(1,1),(2,3),(3,2)}",
        format!(
            "{:.6}, minimizer {:?}",
            kappa.value.as_f64(),
            kappa.minimizer.as_ref().map(|m| m.pairs().to_vec())
        ),
        (kappa.value.as_f64() - 0.0438).abs() <= 1e-3 && kappa_min_ok,
    ));
    let ext = disjoint_extension_floor(&b)?;
    out.push(CheckResult::numeric(
        "disjoint extension floor (model B)",
        0.0806,
        ext.value.as_f64(),
        1e-3,
    ));
    out.push(CheckResult::boolean(
        "overmatch floor < extension floor (model B)",
        "strict inequality",
        format!("{:.6} < {:.6}", kappa.value.as_f64(), ext.value.as_f64()),
        kappa.value.as_f64() < ext.value.as_f64(),
    ));

    // Zero-threshold boundaries of the three constrained exponents.
    let null = reference_null_model();
    let g0 = min_pair_gjs(&null)?;
    for (factor, positive) in [(0.9, true), (1.0, false), (1.1, false)] {
        let er = false_alarm_exponent(&null, factor * g0)?.value.as_f64();
        let name = format!("false-alarm exponent at {factor:.1}x floor");
        let pass = if positive { er > 1e-6 } else { er <= 1e-9 };
        out.push(CheckResult::boolean(
            &name,
            if positive { "> 1e-6" } else { "0" },
            format!("{er:.3e}"),
            pass,
        ));
    }
    let small = reference_small_matched();
    let lam = competitor_floor(&small)?.value.as_f64();
    for (factor, positive) in [(0.9, true), (1.0, false), (1.1, false)] {
        let f = ambiguity_exponent(&small, factor * lam)?.value.as_f64();
        let pass = if positive { f > 1e-6 } else { f <= 1e-9 };
        out.push(CheckResult::boolean(
            &format!("ambiguity exponent at {factor:.1}x floor"),
            if positive { "> 1e-6" } else { "0" },
            format!("{f:.3e}"),
            pass,
        ));
    }
    let kap = overmatch_floor(&small)?.value.as_f64();
    for (factor, positive) in [(0.9, true), (1.0, false), (1.1, false)] {
        let g = overestimate_exponent(&small, factor * kap)?.value.as_f64();
        let pass = if positive { g > 1e-6 } else { g <= 1e-9 };
        out.push(CheckResult::boolean(
            &format!("overestimation exponent at {factor:.1}x floor"),
            if positive { "> 1e-6" } else { "0" },
            format!("{g:.3e}"),
            pass,
        ));
    }

    // Fixed-length mismatch exponent never exceeds the sequential one.
    for (name, model) in [("small matched", reference_small_matched()), ("model A", reference_model_a())] {
        let es = mismatch_exponent_sequential(&model)?.value.as_f64();
        let ef = mismatch_exponent_fixed(&model)?.value.as_f64();
        out.push(CheckResult::boolean(
            &format!("fixed <= sequential mismatch exponent ({name})"),
            "Ef <= Es",
            format!("{ef:.6} <= {es:.6}"),
            ef <= es + 1e-9,
        ));
    }

    // Variational identity: grid-minimized weighted KL equals the Rényi value.
    for (p, q, aw) in [(0.3, 0.6, 0.5), (0.15, 0.8, 1.0), (0.45, 0.75, 2.0)] {
        let pd = Distribution::bernoulli(p).unwrap();
        let qd = Distribution::bernoulli(q).unwrap();
        let grid = grid_weighted_kl_min(&pd, &qd, aw, 2001)?;
        let exact = renyi(&pd, &qd, aw / (1.0 + aw))?;
        out.push(CheckResult::numeric(
            &format!("variational identity (p={p}, q={q}, a={aw})"),
            exact,
            grid,
            1e-4,
        ));
    }

    // Minimum over hypotheses of the pair-sum equals the pairwise minimum.
    for model in [reference_null_model(), bern_model((3, 2), &[0.1, 0.45, 0.8], &[0.25, 0.65], None)] {
        let g0 = min_pair_gjs(&model)?;
        let mut hyp_min = f64::INFINITY;
        for (_, _, m) in enumerate_all(&model.dims)? {
            hyp_min = hyp_min.min(g_combined(
                &model.left_dists,
                &model.right_dists,
                &m,
                &model.rates,
            )?);
        }
        out.push(CheckResult::boolean(
            &format!("hypothesis-min equals pair-min (dims {}x{})", model.dims.m1, model.dims.m2),
            "equal to 1e-12",
            format!("{hyp_min:.12} vs {g0:.12}"),
            (hyp_min - g0).abs() <= 1e-12,
        ));
    }

    // Sequential exponent specialization consistency on a classification
    // instance: both Rényi orderings give the same value.
    let cls = bern_model((3, 1), &[0.2, 0.5, 0.8], &[0.2], Some(&[(0, 0)]));
    let es = mismatch_exponent_sequential(&cls)?.value.as_f64();
    let rates = cls.rates;
    let direct: f64 = (1..3)
        .map(|t| {
            rates.alpha
                * renyi(&cls.right_dists[0], &cls.left_dists[t], rates.beta / rates.total())
                    .unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    let swapped: f64 = (1..3)
        .map(|t| {
            rates.beta
                * renyi(&cls.left_dists[t], &cls.right_dists[0], rates.alpha / rates.total())
                    .unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    out.push(CheckResult::boolean(
        "classification specialization",
        "both orderings equal the exponent",
        format!("{es:.9} / {direct:.9} / {swapped:.9}"),
        (es - direct).abs() <= 1e-10 && (es - swapped).abs() <= 1e-10,
    ));

    Ok(out)
}

/// Formats the checklist as an aligned table.
pub fn format_table(checks: &[CheckResult]) -> String {
    let name_w = checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(5);
    let exp_w = checks.iter().map(|c| c.expected.len()).max().unwrap_or(8).max(8);
    let mut s = format!(
        "{:<name_w$}  {:<exp_w$}  {:<24}  result\n",
        "check", "expected", "computed"
    );
    for c in checks {
        s.push_str(&format!(
            "{:<name_w$}  {:<exp_w$}  {:<24}  {}\n",
            c.name,
            c.expected,
            c.computed,
            if c.pass { "PASS" } else { "FAIL" }
        ));
    }
    s
}

/// Convenience wrapper used by `evaluate`-style callers.
pub fn exponent_catalog(model: &SourceModel) -> Result<serde_json::Value> {
    let mut entries = serde_json::Map::new();
    if model.is_null() {
        entries.insert(
            "min_pair_gjs".into(),
            serde_json::json!(min_pair_gjs(model)?),
        );
    } else {
        entries.insert(
            "sequential_mismatch".into(),
            exponents::evaluate(model, exponents::ExponentKind::SequentialMismatch, None)?,
        );
        entries.insert(
            "competitor_floor".into(),
            exponents::evaluate(model, exponents::ExponentKind::CompetitorFloor, None)?,
        );
        entries.insert(
            "overmatch_floor".into(),
            exponents::evaluate(model, exponents::ExponentKind::OvermatchFloor, None)?,
        );
    }
    Ok(serde_json::Value::Object(entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Rates;
    use crate::hypothesis::HypothesisIndex;

    #[test]
    fn reference_checks_all_pass() {
        let checks = run_reference_checks().unwrap();
        let failed: Vec<&CheckResult> = checks.iter().filter(|c| !c.pass).collect();
        assert!(failed.is_empty(), "failed checks: {failed:#?}");
    }

    #[test]
    fn perturbed_model_fails_the_floor_check() {
        // Negative control: nudging one distribution must break the
        // competitor-floor value.
        let a = reference_model_a();
        let perturbed = SourceModel::new(
            a.dims,
            vec![
                Distribution::bernoulli(0.1).unwrap(),
                Distribution::bernoulli(0.2).unwrap(), // was 0.12
                Distribution::bernoulli(0.3).unwrap(),
                Distribution::bernoulli(0.6).unwrap(),
            ],
            a.right_dists.clone(),
            HypothesisIndex::Reject,
            Rates::new(1.0, 1.0).unwrap(),
        );
        // The perturbed tuple no longer satisfies the matched membership, so
        // rebuild it as a plain tuple for the check via a null-truth clone.
        assert!(perturbed.is_err() || perturbed.is_ok());
        let mut clone = a.clone();
        clone.left_dists[1] = Distribution::bernoulli(0.2).unwrap();
        clone.right_dists[1] = Distribution::bernoulli(0.2).unwrap();
        let check = competitor_floor_check(&clone).unwrap();
        assert!(!check.pass, "perturbation must surface as a diff: {check:?}");
    }
}
