//! Finite-alphabet probability distributions, empirical types, and the
//! divergence functionals every test and exponent is built from.
//!
//! All logarithms are natural. The zero conventions are the usual ones:
//! `0·log(0/q) = 0`, and `p > 0` against `q = 0` yields `+∞` (IEEE infinity,
//! produced by an explicit branch, never a NaN).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Construction slack: input weight vectors whose sum deviates from 1 by at
/// most this much are renormalized; larger deviations are rejected.
pub const NORMALIZATION_SLACK: f64 = 1e-9;

/// Post-construction invariant: weights sum to 1 within this tolerance.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A probability vector on a finite alphabet of size at least 2.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Builds a distribution from raw weights. Weights must be non-negative
    /// and sum to 1 within [`NORMALIZATION_SLACK`]; the vector is then
    /// renormalized so the sum is 1 up to [`SUM_TOLERANCE`].
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "alphabet size must be at least 2, got {}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_SLACK {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {sum}, outside tolerance {NORMALIZATION_SLACK}"
            )));
        }
        let probs = weights.into_iter().map(|w| w / sum).collect();
        Ok(Self { probs })
    }

    /// Bernoulli distribution as the vector `[1-p, p]`; index 1 is "success".
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidDistribution(format!(
                "bernoulli parameter {p} outside [0, 1]"
            )));
        }
        Ok(Self {
            probs: vec![1.0 - p, p],
        })
    }

    /// Uniform distribution on an alphabet of size `k`.
    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![1.0 / k as f64; k])
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, x: usize) -> f64 {
        self.probs[x]
    }

    /// Mixes in `eps` of the uniform distribution so every symbol has
    /// positive mass. Used before exponent optimization, where zero entries
    /// put infinite walls in the objective.
    pub fn smoothed(&self, eps: f64) -> Self {
        let k = self.probs.len() as f64;
        let probs = self
            .probs
            .iter()
            .map(|&p| (1.0 - eps) * p + eps / k)
            .collect();
        Self { probs }
    }

    pub fn has_full_support(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    /// Componentwise closeness used for model membership checks.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.probs.len() == other.probs.len()
            && self
                .probs
                .iter()
                .zip(&other.probs)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights)
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let weights = Vec::<f64>::deserialize(deserializer)?;
        Distribution::new(weights).map_err(serde::de::Error::custom)
    }
}

/// Integer symbol counts of a finite sample sequence. Counts are exact so
/// scoring is reproducible across runs and platforms; the only mutation is
/// the single-writer [`push`](EmpiricalType::push).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalType {
    counts: Vec<u64>,
    length: u64,
}

impl EmpiricalType {
    /// Empty type over an alphabet of `alphabet_size` symbols.
    pub fn new(alphabet_size: usize) -> Self {
        Self {
            counts: vec![0; alphabet_size],
            length: 0,
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidDistribution(
                "alphabet size must be at least 2".into(),
            ));
        }
        let length = counts.iter().sum();
        Ok(Self { counts, length })
    }

    /// Records one observed symbol: exactly one count and the length go up by 1.
    pub fn push(&mut self, symbol: usize) {
        self.counts[symbol] += 1;
        self.length += 1;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> u64 {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    /// The empirical distribution `counts / length`. Requires at least one sample.
    pub fn as_distribution(&self) -> Result<Distribution> {
        if self.length == 0 {
            return Err(Error::Domain(
                "empirical type of an empty sequence has no distribution".into(),
            ));
        }
        let n = self.length as f64;
        Ok(Distribution {
            probs: self.counts.iter().map(|&c| c as f64 / n).collect(),
        })
    }
}

/// Sampling rates of the two databases: at nominal time `n` the left
/// sequences hold `⌈α·n⌉` samples and the right sequences `⌈β·n⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub alpha: f64,
    pub beta: f64,
}

impl Rates {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!(
                "rates must be positive and finite, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Left-sequence length at time `n`.
    pub fn xi(&self, n: u64) -> u64 {
        (self.alpha * n as f64).ceil() as u64
    }

    /// Right-sequence length at time `n`.
    pub fn chi(&self, n: u64) -> u64 {
        (self.beta * n as f64).ceil() as u64
    }

    pub fn total(&self) -> f64 {
        self.alpha + self.beta
    }
}

fn check_same_alphabet(p: &Distribution, q: &Distribution) -> Result<()> {
    if p.alphabet_size() != q.alphabet_size() {
        return Err(Error::DimensionMismatch(
            p.alphabet_size(),
            q.alphabet_size(),
        ));
    }
    Ok(())
}

/// KL divergence `Σ p(x) log(p(x)/q(x))` in nats. Returns `+∞` when `p`
/// puts mass where `q` has none.
pub fn kl(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_same_alphabet(p, q)?;
    let mut sum = 0.0;
    for (&px, &qx) in p.probs().iter().zip(q.probs()) {
        if px == 0.0 {
            continue;
        }
        if qx == 0.0 {
            return Ok(f64::INFINITY);
        }
        sum += px * (px / qx).ln();
    }
    Ok(sum.max(0.0))
}

/// Rényi divergence of positive order: `(1/(order-1))·log Σ p^order q^(1-order)`,
/// with order 1 handled as the KL limit.
pub fn renyi(p: &Distribution, q: &Distribution, order: f64) -> Result<f64> {
    check_same_alphabet(p, q)?;
    if !(order > 0.0 && order.is_finite()) {
        return Err(Error::Domain(format!(
            "Rényi order must be positive and finite, got {order}"
        )));
    }
    if order == 1.0 {
        return kl(p, q);
    }
    let mut sum = 0.0;
    for (&px, &qx) in p.probs().iter().zip(q.probs()) {
        if px == 0.0 {
            // 0^order = 0 for order > 0 regardless of q.
            continue;
        }
        if qx == 0.0 {
            if order > 1.0 {
                // p^order · q^(1-order) with q = 0 blows up.
                return Ok(f64::INFINITY);
            }
            continue;
        }
        sum += px.powf(order) * qx.powf(1.0 - order);
    }
    if sum <= 0.0 {
        // Disjoint supports.
        return Ok(f64::INFINITY);
    }
    Ok((sum.ln() / (order - 1.0)).max(0.0))
}

/// Binary KL divergence `p log(p/q) + (1-p) log((1-p)/(1-q))` for
/// arguments strictly inside (0, 1).
pub fn binary_kl(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!(
            "binary KL arguments must lie strictly in (0,1), got p={p}, q={q}"
        )));
    }
    Ok((p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln()).max(0.0))
}

/// The rate-weighted mixture `(α·p + β·q)/(α+β)`.
pub fn mixture(p: &Distribution, q: &Distribution, rates: &Rates) -> Result<Distribution> {
    check_same_alphabet(p, q)?;
    let total = rates.total();
    let probs = p
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(&px, &qx)| (rates.alpha * px + rates.beta * qx) / total)
        .collect();
    Ok(Distribution { probs })
}

/// Generalized Jensen-Shannon divergence
/// `α·D(p‖R) + β·D(q‖R)` with `R` the rate-weighted mixture.
/// Always finite, non-negative, and zero iff `p = q`.
pub fn gjs(p: &Distribution, q: &Distribution, rates: &Rates) -> Result<f64> {
    check_same_alphabet(p, q)?;
    let total = rates.total();
    let mut sum = 0.0;
    for (&px, &qx) in p.probs().iter().zip(q.probs()) {
        let r = (rates.alpha * px + rates.beta * qx) / total;
        // r = 0 only when both are 0, and then both terms vanish.
        if px > 0.0 {
            sum += rates.alpha * px * (px / r).ln();
        }
        if qx > 0.0 {
            sum += rates.beta * qx * (qx / r).ln();
        }
    }
    Ok(sum.max(0.0))
}

/// Evaluates both sides of the decomposition
/// `α·D(Ω‖P) + β·D(Ψ‖P) = GJS(Ω,Ψ,α,β) + (α+β)·D(R‖P)`.
/// Test helper: callers compare the two returned values.
pub fn decompose_identity_check(
    omega: &Distribution,
    psi: &Distribution,
    p: &Distribution,
    rates: &Rates,
) -> Result<(f64, f64)> {
    check_same_alphabet(omega, psi)?;
    check_same_alphabet(omega, p)?;
    if !p.has_full_support() {
        return Err(Error::Domain(
            "decomposition check requires a full-support reference".into(),
        ));
    }
    let lhs = rates.alpha * kl(omega, p)? + rates.beta * kl(psi, p)?;
    let r = mixture(omega, psi, rates)?;
    let rhs = gjs(omega, psi, rates)? + rates.total() * kl(&r, p)?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::prelude::*;

    fn bern(p: f64) -> Distribution {
        Distribution::bernoulli(p).unwrap()
    }

    fn unit_rates() -> Rates {
        Rates::new(1.0, 1.0).unwrap()
    }

    /// Independent direct-sum oracle for binary KL of full distributions.
    fn kl_two_term_oracle(p: f64, q: f64) -> f64 {
        (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln() + p * (p / q).ln()
    }

    #[test]
    fn kl_identity_is_zero() {
        for p in [0.1, 0.37, 0.9] {
            assert_eq!(kl(&bern(p), &bern(p)).unwrap(), 0.0);
        }
        let t = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(kl(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn kl_disjoint_support_is_infinite() {
        assert_eq!(kl(&bern(1.0), &bern(0.0)).unwrap(), f64::INFINITY);
        assert_eq!(kl(&bern(0.0), &bern(1.0)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn kl_matches_direct_sum_oracle() {
        let got = kl(&bern(0.3), &bern(0.5)).unwrap();
        assert!((got - kl_two_term_oracle(0.3, 0.5)).abs() <= 1e-12);
    }

    #[test]
    fn kl_dimension_mismatch_rejected() {
        let t = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(
            kl(&bern(0.5), &t),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn renyi_identity_is_zero() {
        assert_eq!(renyi(&bern(0.4), &bern(0.4), 0.5).unwrap(), 0.0);
    }

    #[test]
    fn renyi_rejects_nonpositive_order() {
        assert!(renyi(&bern(0.3), &bern(0.6), 0.0).is_err());
        assert!(renyi(&bern(0.3), &bern(0.6), -1.0).is_err());
    }

    #[test]
    fn renyi_order_half_matches_power_sum_oracle() {
        // Independent evaluation of the two-term power sum at order 1/2.
        let (p, q) = (0.1, 0.9);
        let sum = (p * q).sqrt() + ((1.0 - p) * (1.0 - q)).sqrt();
        let expected = sum.ln() / (0.5 - 1.0);
        let got = renyi(&bern(p), &bern(q), 0.5).unwrap();
        assert!((got - expected).abs() <= 1e-12);
    }

    #[test]
    fn renyi_skew_symmetry_identity() {
        // α·D_{β/(α+β)}(q‖p) = β·D_{α/(α+β)}(p‖q)
        let mut rng = StdRng::seed_from_u64(7);
        for (alpha, beta) in [(1.0, 1.0), (2.0, 0.5)] {
            for _ in 0..50 {
                let p = bern(rng.random_range(0.02..0.98));
                let q = bern(rng.random_range(0.02..0.98));
                let lhs = alpha * renyi(&q, &p, beta / (alpha + beta)).unwrap();
                let rhs = beta * renyi(&p, &q, alpha / (alpha + beta)).unwrap();
                assert!((lhs - rhs).abs() <= 1e-10, "lhs={lhs}, rhs={rhs}");
            }
        }
    }

    #[test]
    fn renyi_continuous_at_order_one() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let p = bern(rng.random_range(0.05..0.95));
            let q = bern(rng.random_range(0.05..0.95));
            let at_kl = kl(&p, &q).unwrap();
            for eps in [1e-5, 1e-6] {
                for order in [1.0 - eps, 1.0 + eps] {
                    let r = renyi(&p, &q, order).unwrap();
                    assert!(
                        (r - at_kl).abs() <= 1e-6,
                        "order={order}: renyi={r}, kl={at_kl}"
                    );
                }
            }
        }
    }

    #[test]
    fn binary_kl_basics() {
        assert_eq!(binary_kl(0.5, 0.5).unwrap(), 0.0);
        // Symmetric under joint complement.
        let a = binary_kl(0.3, 0.7).unwrap();
        let b = binary_kl(0.7, 0.3).unwrap();
        assert!((a - b).abs() <= 1e-12);
        assert!(binary_kl(0.0, 0.5).is_err());
        assert!(binary_kl(0.5, 1.0).is_err());
    }

    #[test]
    fn binary_kl_derivative_matches_finite_difference() {
        // ∂d/∂q = (q-p)/(q(1-q)), checked by a central difference.
        let (p, q) = (0.3, 0.5);
        let h = 1e-6;
        let fd = (binary_kl(p, q + h).unwrap() - binary_kl(p, q - h).unwrap()) / (2.0 * h);
        let analytic = (q - p) / (q * (1.0 - q));
        assert!(analytic > 0.0);
        assert!((fd - analytic).abs() <= 1e-6, "fd={fd}, analytic={analytic}");
    }

    #[test]
    fn mixture_cases() {
        let r = unit_rates();
        let p = bern(0.3);
        assert_eq!(mixture(&p, &p, &r).unwrap(), p);
        let m = mixture(&bern(0.0), &bern(1.0), &r).unwrap();
        assert!(m.approx_eq(&bern(0.5), 1e-15));
        // (2·0.1 + 1·0.4)/3 = 0.2
        let r21 = Rates::new(2.0, 1.0).unwrap();
        let m = mixture(&bern(0.1), &bern(0.4), &r21).unwrap();
        assert!(m.approx_eq(&bern(0.2), 1e-12));
    }

    #[test]
    fn gjs_zero_iff_equal() {
        let r = unit_rates();
        assert_eq!(gjs(&bern(0.25), &bern(0.25), &r).unwrap(), 0.0);
        assert!(gjs(&bern(0.25), &bern(0.26), &r).unwrap() > 0.0);
    }

    #[test]
    fn gjs_equals_twice_jensen_shannon_at_unit_rates() {
        // Independent JS implementation: JS = (KL(p‖m) + KL(q‖m))/2.
        let mut rng = StdRng::seed_from_u64(3);
        let r = unit_rates();
        for _ in 0..50 {
            let p = bern(rng.random_range(0.02..0.98));
            let q = bern(rng.random_range(0.02..0.98));
            let m = mixture(&p, &q, &r).unwrap();
            let js = 0.5 * (kl(&p, &m).unwrap() + kl(&q, &m).unwrap());
            let g = gjs(&p, &q, &r).unwrap();
            assert!((g - 2.0 * js).abs() <= 1e-12);
        }
    }

    #[test]
    fn gjs_close_bernoulli_pair_magnitude() {
        let g = gjs(&bern(0.1), &bern(0.12), &unit_rates()).unwrap();
        assert!(g > 0.0 && g < 0.0015, "g = {g}");
    }

    #[test]
    fn gjs_recomposes_from_parts() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..50 {
            let rates = Rates::new(rng.random_range(0.2..3.0), rng.random_range(0.2..3.0)).unwrap();
            let p = bern(rng.random_range(0.02..0.98));
            let q = bern(rng.random_range(0.02..0.98));
            let r = mixture(&p, &q, &rates).unwrap();
            let recomposed = rates.alpha * kl(&p, &r).unwrap() + rates.beta * kl(&q, &r).unwrap();
            let direct = gjs(&p, &q, &rates).unwrap();
            assert!((recomposed - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn decomposition_identity_trivial_and_random() {
        let rates = unit_rates();
        let p = bern(0.3);
        let (lhs, rhs) = decompose_identity_check(&p, &p, &p, &rates).unwrap();
        assert!(lhs.abs() <= 1e-15 && rhs.abs() <= 1e-15);

        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..50 {
            let omega = bern(rng.random_range(0.02..0.98));
            let psi = bern(rng.random_range(0.02..0.98));
            let p = bern(rng.random_range(0.02..0.98));
            let (lhs, rhs) = decompose_identity_check(&omega, &psi, &p, &rates).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10, "lhs={lhs}, rhs={rhs}");
        }
        // Ternary with asymmetric rates.
        let rates = Rates::new(2.0, 0.5).unwrap();
        for _ in 0..50 {
            let draw = |rng: &mut StdRng| {
                let a = rng.random_range(0.05..0.9);
                let b = rng.random_range(0.05..(0.99 - a));
                Distribution::new(vec![a, b, 1.0 - a - b]).unwrap()
            };
            let omega = draw(&mut rng);
            let psi = draw(&mut rng);
            let p = draw(&mut rng);
            let (lhs, rhs) = decompose_identity_check(&omega, &psi, &p, &rates).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10, "lhs={lhs}, rhs={rhs}");
        }
    }

    #[test]
    fn variational_form_matches_renyi_on_grid() {
        // min_V a·D(V‖P) + D(V‖Q) over a 2001-point binary grid vs Rényi.
        let mut rng = StdRng::seed_from_u64(17);
        for a in [0.5, 1.0, 2.0] {
            for _ in 0..20 {
                let p = bern(rng.random_range(0.05..0.95));
                let q = bern(rng.random_range(0.05..0.95));
                let mut best = f64::INFINITY;
                for i in 0..=2000 {
                    let v = bern(i as f64 / 2000.0);
                    let val = a * kl(&v, &p).unwrap() + kl(&v, &q).unwrap();
                    best = best.min(val);
                }
                let expect = renyi(&p, &q, a / (1.0 + a)).unwrap();
                assert!((best - expect).abs() <= 1e-4, "a={a}: grid={best}, renyi={expect}");
            }
        }
    }

    #[test]
    fn empirical_type_incremental_push() {
        let mut t = EmpiricalType::new(3);
        t.push(1);
        assert_eq!(t.counts(), &[0, 1, 0]);
        assert_eq!(t.len(), 1);
        t.push(1);
        t.push(2);
        assert_eq!(t.counts(), &[0, 2, 1]);
        assert_eq!(t.len(), 3);
        let d = t.as_distribution().unwrap();
        assert!(d.approx_eq(&Distribution::new(vec![0.0, 2.0 / 3.0, 1.0 / 3.0]).unwrap(), 1e-15));
        assert!(EmpiricalType::new(2).as_distribution().is_err());
    }

    #[test]
    fn distribution_normalization_policy() {
        // Within slack: renormalized.
        let d = Distribution::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        let sum: f64 = d.probs().iter().sum();
        assert!((sum - 1.0).abs() <= SUM_TOLERANCE);
        // Outside slack: rejected.
        assert!(Distribution::new(vec![0.5, 0.51]).is_err());
        assert!(Distribution::new(vec![1.0]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn distribution_serializes_as_json_array() {
        let d = Distribution::new(vec![0.25, 0.75]).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, "[0.25,0.75]");
        let back: Distribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<Distribution>("[0.2,0.3]").is_err());
    }

    #[test]
    fn rates_sample_counts() {
        let r = Rates::new(0.5, 2.0).unwrap();
        assert_eq!(r.xi(1), 1);
        assert_eq!(r.xi(2), 1);
        assert_eq!(r.xi(3), 2);
        assert_eq!(r.chi(3), 6);
        assert!(Rates::new(0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn renyi_below_kl_for_low_orders(
            p in 0.02f64..0.98,
            q in 0.02f64..0.98,
            order in 0.05f64..0.95,
        ) {
            let p = bern(p);
            let q = bern(q);
            let r = renyi(&p, &q, order).unwrap();
            let k = kl(&p, &q).unwrap();
            prop_assert!(r >= 0.0);
            prop_assert!(r <= k + 1e-12);
        }

        #[test]
        fn renyi_monotone_in_order(
            p in 0.02f64..0.98,
            q in 0.02f64..0.98,
            lo in 0.05f64..0.9,
            delta in 0.01f64..0.5,
        ) {
            let p = bern(p);
            let q = bern(q);
            let a = renyi(&p, &q, lo).unwrap();
            let b = renyi(&p, &q, lo + delta).unwrap();
            prop_assert!(a <= b + 1e-12);
        }

        #[test]
        fn gjs_nonnegative_and_symmetric_at_equal_rates(
            p in 0.0f64..=1.0,
            q in 0.0f64..=1.0,
        ) {
            let rates = Rates::new(1.0, 1.0).unwrap();
            let a = gjs(&bern(p), &bern(q), &rates).unwrap();
            let b = gjs(&bern(q), &bern(p), &rates).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!(a.is_finite());
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
