//! Calculators for the explicit constants behind the layer-count results.
//!
//! Three groups live here:
//!
//! * the counterexample analysis for patterns `(n, 1, ℓ₁, …, ℓ_k)`, which
//!   pits a lower bound on the optimal density against an upper bound that
//!   any optimum with finitely many layers would have to satisfy;
//! * the merge constants `A`, `B`, `c` and the resulting bound on the number
//!   of layers of an optimal permutation;
//! * the layer-length thresholds for patterns without consecutive singletons.
//!
//! The counterexample quantities span thousands of orders of magnitude
//! (`n^{n-L}` for `n` in the hundreds), so they are carried as natural
//! logarithms. Integer pieces are formed exactly as big integers before the
//! logarithm is taken.

use std::cmp::Ordering;
use std::f64::consts::LN_2;
use std::ops::{Add, Div, Mul};

use num_bigint::BigUint;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::counting::{binomial, merge_shape_hypothesis};
use crate::error::{Error, Result};
use crate::perm::LayeredShape;
use crate::permuton::multinomial;

/// A positive real stored as its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogReal {
    pub ln: f64,
}

impl LogReal {
    pub fn from_ln(ln: f64) -> Self {
        LogReal { ln }
    }

    pub fn from_f64(v: f64) -> Self {
        assert!(v > 0.0, "LogReal needs a positive value, got {v}");
        LogReal { ln: v.ln() }
    }

    pub fn from_biguint(v: &BigUint) -> Self {
        LogReal { ln: ln_biguint(v) }
    }

    /// The value as f64; underflows to 0 and overflows to infinity.
    pub fn value(&self) -> f64 {
        self.ln.exp()
    }

    pub fn powf(self, e: f64) -> LogReal {
        LogReal { ln: self.ln * e }
    }

    pub fn scale(self, factor: f64) -> LogReal {
        self * LogReal::from_f64(factor)
    }
}

impl Mul for LogReal {
    type Output = LogReal;

    // Products of values are sums of logarithms.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, o: LogReal) -> LogReal {
        LogReal { ln: self.ln + o.ln }
    }
}

impl Div for LogReal {
    type Output = LogReal;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: LogReal) -> LogReal {
        LogReal { ln: self.ln - o.ln }
    }
}

impl Add for LogReal {
    type Output = LogReal;

    /// `ln(eᵃ + eᵇ)` without leaving the log domain.
    fn add(self, o: LogReal) -> LogReal {
        let (hi, lo) = if self.ln >= o.ln { (self.ln, o.ln) } else { (o.ln, self.ln) };
        LogReal { ln: hi + (lo - hi).exp().ln_1p() }
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.ln.partial_cmp(&other.ln)
    }
}

impl Serialize for LogReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("LogReal", 2)?;
        st.serialize_field("value", &self.value())?;
        st.serialize_field("ln", &self.ln)?;
        st.end()
    }
}

/// Natural log of a positive big integer, from its top 64 bits.
pub fn ln_biguint(v: &BigUint) -> f64 {
    assert!(!v.is_zero(), "ln of zero");
    let shift = v.bits().saturating_sub(64);
    let top = (v >> shift).to_u64().unwrap() as f64;
    top.ln() + shift as f64 * LN_2
}

/// Drops the first layer.
pub fn sigma_prime(sigma: &LayeredShape) -> Result<LayeredShape> {
    if sigma.layer_count() < 2 {
        return Err(Error::arg("removing the first layer needs at least two layers"));
    }
    LayeredShape::new(sigma.sizes()[1..].to_vec())
}

/// The three partial sums over layers `3..K` used to expand the density of
/// `(n, 1, tail)`:
///
/// ```text
/// Σ₀ = Σ_{3≤a<b<i₁<…<i_k≤K} x_a^n x_b Π_j x_{i_j}^{ℓ_j}
/// Σ₁ = Σ_{3≤b<i₁<…<i_k≤K}  x_b Π_j x_{i_j}^{ℓ_j}
/// Σ₂ = Σ_{3≤i₁<…<i_k≤K}    Π_j x_{i_j}^{ℓ_j}
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaSums {
    pub sigma0: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    /// Set when `K < k + 2`; all sums are then zero.
    pub degenerate: bool,
}

pub fn sigma_sums(tail: &LayeredShape, xs: &[f64], n: usize) -> SigmaSums {
    let k = tail.layer_count();
    if xs.len() < k + 2 {
        return SigmaSums { sigma0: 0.0, sigma1: 0.0, sigma2: 0.0, degenerate: true };
    }
    let rest = &xs[2..];
    let with = |prefix: &[usize]| {
        let mut ell = prefix.to_vec();
        ell.extend_from_slice(tail.sizes());
        crate::permuton::chain_sum(&ell, rest)
    };
    SigmaSums { sigma0: with(&[n, 1]), sigma1: with(&[1]), sigma2: with(&[]), degenerate: false }
}

/// The pattern `(n, 1, tail…)`.
pub fn counterexample_pattern(n: usize, tail: &LayeredShape) -> LayeredShape {
    let mut v = vec![n, 1];
    v.extend_from_slice(tail.sizes());
    LayeredShape::new(v).unwrap()
}

/// Numbers behind the contradiction for the pattern `(n, 1, tail…)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleAnalysis {
    pub n: usize,
    pub tail: LayeredShape,
    /// `L = 1 + Σ ℓ_j`.
    #[serde(rename = "L")]
    pub big_l: usize,
    /// `A = (n+L)!/(n! Π ℓ_j!)`, an integer.
    #[serde(rename = "A", serialize_with = "ser_big")]
    pub a: BigUint,
    /// `C(n+L, n)`.
    #[serde(serialize_with = "ser_big")]
    pub binom: BigUint,
    /// Lower bound on the density of `(1, tail…)` in some layered permuton.
    pub d_prime: f64,
    /// `C(n+L,n)·(n/(n+L))ⁿ·(L/(n+L))^L·d'`, a lower bound on the optimal density.
    pub lower_bound: LogReal,
    /// `(A/(C(n+L,n)·n^{n−L}·d'))^{1/L}`, an upper bound on the first layer of
    /// an optimum with finitely many layers.
    pub x1_upper: LogReal,
    /// `A·(3·x1ⁿ + x1/n)` at `x1 = x1_upper`.
    pub rhs_bound: LogReal,
    /// `L^L/(2 e^L L!)·d'`, a lower bound on the optimal density valid for
    /// every large enough `n`.
    pub d0: f64,
    /// `lower_bound > rhs_bound`: no optimum with finitely many layers exists.
    pub contradiction: bool,
}

fn ser_big<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

pub fn counterexample_analysis(n: usize, tail: &LayeredShape, d_prime: f64) -> Result<CounterexampleAnalysis> {
    if !(d_prime > 0.0 && d_prime <= 1.0) {
        return Err(Error::arg(format!("d' = {d_prime} outside (0, 1]")));
    }
    let big_l = 1 + tail.order();
    if n < big_l {
        return Err(Error::arg(format!("n = {n} is below L = {big_l}")));
    }
    let (nn, ll) = (n as u64, big_l as u64);
    let a = multinomial(&counterexample_pattern(n, tail));
    let binom = binomial(nn + ll, nn);
    let ln_d = d_prime.ln();

    // C(n+L,n)·n^n·L^L / (n+L)^(n+L), formed exactly.
    let num = &binom * BigUint::from(nn).pow(n as u32) * BigUint::from(ll).pow(big_l as u32);
    let den = BigUint::from(nn + ll).pow((n + big_l) as u32);
    let lower_bound = LogReal::from_ln(ln_biguint(&num) - ln_biguint(&den) + ln_d);

    let ln_inner = ln_biguint(&a) - ln_biguint(&(&binom * BigUint::from(nn).pow((n - big_l) as u32))) - ln_d;
    let x1_upper = LogReal::from_ln(ln_inner / big_l as f64);

    let a_log = LogReal::from_biguint(&a);
    let first = x1_upper.powf(n as f64).scale(3.0);
    let second = x1_upper / LogReal::from_f64(n as f64);
    let rhs_bound = a_log * (first + second);

    let d0 = (ll as f64 * (ll as f64).ln() - ll as f64 - ln_factorial(ll) - LN_2).exp() * d_prime;
    Ok(CounterexampleAnalysis {
        n,
        tail: tail.clone(),
        big_l,
        a,
        binom,
        d_prime,
        lower_bound,
        x1_upper,
        rhs_bound,
        d0,
        contradiction: lower_bound > rhs_bound,
    })
}

/// The worked estimates for the pattern `(n, 1, 2)` with `n ≥ 13`, all in
/// units of `C(n+3, n)/n³`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThirteenChain {
    pub n: usize,
    /// `lower_bound / (C/n³)`.
    pub lower_ratio: f64,
    /// `C·e^{-3}·(39/(16n))³·d'` in the same units.
    pub simplified_lower_ratio: f64,
    /// `3C·(3/(13⁷ d' n³) + (1/n)·∛(3/(13⁴ d' n⁶)))` in the same units.
    pub upper_estimate_ratio: f64,
    /// `rhs_bound / (C/n³)`.
    pub rhs_ratio: f64,
    pub lower_threshold: f64,
    pub upper_threshold: f64,
}

impl ThirteenChain {
    /// Every displayed inequality points the right way.
    pub fn holds(&self) -> bool {
        self.lower_ratio >= self.simplified_lower_ratio
            && self.simplified_lower_ratio > self.lower_threshold
            && self.lower_threshold > self.upper_threshold
            && self.upper_threshold > self.upper_estimate_ratio
            && self.upper_estimate_ratio >= self.rhs_ratio
    }
}

pub const LOWER_THRESHOLD_132: f64 = 0.33;
pub const UPPER_THRESHOLD_132: f64 = 0.19;

/// The chain `lower ≥ simplified > 0.33 > 0.19 > estimate ≥ rhs`, in units of
/// `C(n+3,n)/n³`, for the pattern `(n, 1, 2)`.
pub fn thirteen_chain(n: usize, d_prime: f64) -> Result<ThirteenChain> {
    if n < 13 {
        return Err(Error::arg(format!("the worked estimates need n ≥ 13, got {n}")));
    }
    let tail = LayeredShape::new(vec![2]).unwrap();
    let an = counterexample_analysis(n, &tail, d_prime)?;
    let nf = n as f64;
    let unit = LogReal::from_biguint(&an.binom) / LogReal::from_f64(nf).powf(3.0);
    let ratio = |v: LogReal| (v / unit).value();

    let simplified =
        LogReal::from_ln(-3.0 + 3.0 * (39.0 / (16.0 * nf)).ln() + d_prime.ln()) * LogReal::from_biguint(&an.binom);
    let t1 = LogReal::from_ln(3f64.ln() - 7.0 * 13f64.ln() - d_prime.ln() - 3.0 * nf.ln());
    let t2 = LogReal::from_ln((3f64.ln() - 4.0 * 13f64.ln() - d_prime.ln() - 6.0 * nf.ln()) / 3.0 - nf.ln());
    let estimate = LogReal::from_biguint(&an.binom).scale(3.0) * (t1 + t2);
    Ok(ThirteenChain {
        n,
        lower_ratio: ratio(an.lower_bound),
        simplified_lower_ratio: ratio(simplified),
        upper_estimate_ratio: ratio(estimate),
        rhs_ratio: ratio(an.rhs_bound),
        lower_threshold: LOWER_THRESHOLD_132,
        upper_threshold: UPPER_THRESHOLD_132,
    })
}

/// Outcome of [`find_n0`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct N0Search {
    pub tail: LayeredShape,
    pub d_prime: f64,
    pub horizon: usize,
    /// Smallest `n ≥ L` with the contradiction flag set.
    pub n0: Option<usize>,
    /// Whether the flag stays set for every `n` in `n0..=horizon`.
    pub persistent: bool,
    /// First `n` above `n0` where the flag drops, if any.
    pub first_gap: Option<usize>,
}

pub const DEFAULT_N0_HORIZON: usize = 500;

pub fn find_n0(tail: &LayeredShape, d_prime: f64, horizon: usize) -> Result<N0Search> {
    let big_l = 1 + tail.order();
    let mut n0 = None;
    let mut first_gap = None;
    for n in big_l..=horizon {
        let flag = counterexample_analysis(n, tail, d_prime)?.contradiction;
        match (n0, flag) {
            (None, true) => n0 = Some(n),
            (Some(_), false) if first_gap.is_none() => first_gap = Some(n),
            _ => {}
        }
    }
    Ok(N0Search {
        tail: tail.clone(),
        d_prime,
        horizon,
        n0,
        persistent: n0.is_some() && first_gap.is_none(),
        first_gap,
    })
}

/// Constants of the merge lemma for a pattern and a choice of `C`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeConstants {
    #[serde(rename = "C")]
    pub big_c: f64,
    pub a_merge: f64,
    pub b_merge: f64,
    pub c: f64,
    /// `(⌊2/c⌋ + 1)(ℓ₁ − 1)`.
    #[serde(serialize_with = "ser_big")]
    pub k_bound: BigUint,
}

/// `C = 1/(2m³k^{2m+1})`, the choice that makes every optimal permutation
/// have `k` layers of size at least `C|π|` eventually.
pub fn bounded_layer_c(sigma: &LayeredShape) -> f64 {
    let (m, k) = (sigma.order() as f64, sigma.layer_count() as f64);
    (-(2f64.ln() + 3.0 * m.ln() + (2.0 * m + 1.0) * k.ln())).exp()
}

/// `x^x` in log form with `0⁰ = 1`.
fn ln_self_power(x: usize) -> f64 {
    if x == 0 {
        0.0
    } else {
        x as f64 * (x as f64).ln()
    }
}

pub fn merge_constants(sigma: &LayeredShape, big_c: f64) -> Result<MergeConstants> {
    merge_shape_hypothesis(sigma).map_err(Error::Argument)?;
    if !(big_c > 0.0 && big_c < 1.0) {
        return Err(Error::arg(format!("C = {big_c} outside (0, 1)")));
    }
    Ok(merge_constants_unchecked(sigma, big_c))
}

pub(crate) fn merge_constants_unchecked(sigma: &LayeredShape, big_c: f64) -> MergeConstants {
    let ell = sigma.sizes();
    let (m, k, l1) = (sigma.order(), ell.len(), ell[0]);
    let ln_a = 2f64.ln() + (m - l1) as f64 * big_c.ln()
        - l1 as f64 * ((3 * l1) as f64).ln()
        - ell.iter().map(|&l| ln_self_power(l)).sum::<f64>();
    let ln_b = ell
        .windows(2)
        .map(|w| m as f64 - ln_self_power(w[0]) - ln_self_power(w[1]) - ln_self_power(m - w[0] - w[1]))
        .fold(f64::NEG_INFINITY, f64::max);
    let ln_ratio = ln_a - (k as f64).ln() - ln_b;
    let ln_c = ln_ratio.min(big_c.ln()) - LN_2;
    let floor_two_over_c = big_floor_exp(LN_2 - ln_c);
    MergeConstants {
        big_c,
        a_merge: ln_a.exp(),
        b_merge: ln_b.exp(),
        c: ln_c.exp(),
        k_bound: (floor_two_over_c + 1u32) * BigUint::from(l1 - 1),
    }
}

/// `⌊e^y⌋` for `y ≥ 0`, exact up to f64 resolution of the mantissa.
fn big_floor_exp(y: f64) -> BigUint {
    let e2 = y / LN_2;
    if e2 < 52.0 {
        return BigUint::from_f64(y.exp().floor()).unwrap();
    }
    let whole = e2.floor();
    let mantissa = (2f64.powf(e2 - whole) * 2f64.powi(52)).floor();
    BigUint::from_f64(mantissa).unwrap() << (whole as u64 - 52)
}

/// Layer-length thresholds for patterns without consecutive singletons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructureThresholds {
    /// Every segment of an optimal permuton contains a layer at least this
    /// fraction of its length: `1/(m²k^m)`.
    pub segment_layer: f64,
    /// An optimal permuton has `k` layers at least this long: `1/(m³k^{2m+1})`.
    pub klayers: f64,
    /// `(ε/4)^m/k`.
    pub pair_threshold: f64,
    pub epsilon: f64,
}

pub fn structure_thresholds(sigma: &LayeredShape, epsilon: f64) -> Result<StructureThresholds> {
    if sigma.has_consecutive_singletons() {
        return Err(Error::arg(format!("pattern {sigma} has consecutive singleton layers")));
    }
    if sigma.order() < 2 {
        return Err(Error::arg("pattern order must be at least 2"));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::arg(format!("epsilon = {epsilon} outside (0, 1]")));
    }
    let (m, k) = (sigma.order() as i32, sigma.layer_count() as f64);
    Ok(StructureThresholds {
        segment_layer: 1.0 / ((m * m) as f64 * k.powi(m)),
        klayers: 1.0 / ((m * m * m) as f64 * k.powi(2 * m + 1)),
        pair_threshold: (epsilon / 4.0).powi(m) / k,
        epsilon,
    })
}

/// Length of the `(2k−3)`-th longest layer, the natural `ε` for the
/// short-pair threshold.
pub fn default_epsilon(sigma: &LayeredShape, lengths: &[f64]) -> Option<f64> {
    let idx = (2 * sigma.layer_count()).checked_sub(3)?.max(1);
    let mut sorted = lengths.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    sorted.get(idx - 1).copied()
}

/// `ℓ₁, ℓ_k ≥ 2` and `ℓᵢ + ℓᵢ₊₁ ≥ max(ℓ₁, ℓ_k) + 1` for every adjacent pair.
pub fn finite_layers_hypothesis(sigma: &LayeredShape) -> bool {
    let s = sigma.sizes();
    let k = s.len();
    k >= 2 && s[0] >= 2 && s[k - 1] >= 2 && s.windows(2).all(|w| w[0] + w[1] > s[0].max(s[k - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permuton::density_polynomial;

    fn shape(v: &[usize]) -> LayeredShape {
        LayeredShape::new(v.to_vec()).unwrap()
    }

    const D132: f64 = 0.464_101_615_137_754_6;

    #[test]
    fn ln_of_big_integers() {
        assert!((ln_biguint(&BigUint::from(1000u32)) - 1000f64.ln()).abs() < 1e-13);
        let big = BigUint::from(7u32).pow(500);
        assert!((ln_biguint(&big) - 500.0 * 7f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn log_real_arithmetic() {
        let a = LogReal::from_f64(3.0);
        let b = LogReal::from_f64(5.0);
        assert!(((a + b).value() - 8.0).abs() < 1e-14);
        assert!(((a * b).value() - 15.0).abs() < 1e-13);
        assert!((a.powf(2.0).value() - 9.0).abs() < 1e-13);
        assert!(a < b);
        let tiny = LogReal::from_ln(-5000.0);
        assert_eq!((tiny + a).ln, a.ln);
    }

    #[test]
    fn sigma_prime_examples() {
        assert_eq!(sigma_prime(&shape(&[13, 1, 2])).unwrap(), shape(&[1, 2]));
        assert_eq!(sigma_prime(&shape(&[2, 1, 2])).unwrap(), shape(&[1, 2]));
        assert_eq!(sigma_prime(&shape(&[3, 3])).unwrap(), shape(&[3]));
        assert!(sigma_prime(&shape(&[3])).is_err());
    }

    #[test]
    fn sigma_sums_examples() {
        let tail = shape(&[2]);
        let xs = [0.4, 0.1, 0.2, 0.3];
        // K = k + 2: the single tuple i₁ = 3.
        let s = sigma_sums(&tail, &xs[..3], 5);
        assert!(!s.degenerate);
        assert_eq!(s.sigma2, 0.2f64.powi(2));
        assert_eq!((s.sigma0, s.sigma1), (0.0, 0.0));
        let s = sigma_sums(&tail, &[0.25; 4], 5);
        assert_eq!(s.sigma0, 0.0);
        assert!((s.sigma1 - 0.25f64.powi(3)).abs() < 1e-18);
        assert!(sigma_sums(&tail, &xs[..2], 5).degenerate);
    }

    #[test]
    fn expansion_reconstructs_density() {
        let xs = [0.35, 0.05, 0.1, 0.2, 0.15, 0.15];
        for (n, tail) in [(5, shape(&[2])), (3, shape(&[1, 2])), (4, shape(&[2, 2]))] {
            let s = sigma_sums(&tail, &xs, n);
            let sigma = counterexample_pattern(n, &tail);
            let a = multinomial(&sigma).to_f64().unwrap();
            let (x1, x2) = (xs[0], xs[1]);
            let nn = n as i32;
            let rebuilt =
                a * (x1.powi(nn) * x2 * s.sigma2 + x1.powi(nn) * s.sigma1 + x2.powi(nn) * s.sigma1 + s.sigma0);
            let direct = density_polynomial(&sigma, &xs);
            assert!((rebuilt - direct).abs() <= 1e-12 * direct, "{rebuilt} vs {direct}");
            assert!(s.sigma0 <= s.sigma1 && s.sigma1 <= s.sigma2 && s.sigma2 <= 1.0);
        }
    }

    #[test]
    fn counterexample_at_thirteen() {
        let an = counterexample_analysis(13, &shape(&[2]), D132).unwrap();
        assert_eq!(an.big_l, 3);
        assert_eq!(an.binom, BigUint::from(560u32));
        assert_eq!(an.a, BigUint::from(1680u32));
        assert!(an.contradiction);
        let unit = 560.0 / 13f64.powi(3);
        assert!(an.lower_bound.value() > 0.33 * unit);
        assert!(an.rhs_bound.value() < 0.19 * unit);
        // Hand evaluation of the closed forms at n = 13.
        let lower = 560.0 * (13.0f64 / 16.0).powi(13) * (3.0f64 / 16.0).powi(3) * D132;
        assert!((an.lower_bound.value() - lower).abs() < 1e-12 * lower);
        let x1 = (3.0 / (13f64.powi(10) * D132)).cbrt();
        assert!((an.x1_upper.value() - x1).abs() < 1e-12 * x1);
        let rhs = 1680.0 * (3.0 * x1.powi(13) + x1 / 13.0);
        assert!((an.rhs_bound.value() - rhs).abs() < 1e-12 * rhs);
    }

    #[test]
    fn counterexample_argument_errors() {
        assert!(counterexample_analysis(13, &shape(&[2]), 0.0).is_err());
        assert!(counterexample_analysis(13, &shape(&[2]), 1.5).is_err());
        assert!(counterexample_analysis(2, &shape(&[2]), 0.4).is_err());
        // n = 12 has no worked claim; the flag is whatever the formulas give.
        assert!(counterexample_analysis(12, &shape(&[2]), D132).is_ok());
    }

    #[test]
    fn chain_from_thirteen_to_one_hundred() {
        for n in 13..=100 {
            let chain = thirteen_chain(n, D132).unwrap();
            assert!(chain.holds(), "{chain:?}");
        }
        assert!(thirteen_chain(12, D132).is_err());
    }

    #[test]
    fn n0_search() {
        let tail = shape(&[2]);
        let r = find_n0(&tail, D132, 200).unwrap();
        assert!(r.n0.unwrap() <= 13);
        assert!(r.persistent);
        let weaker = find_n0(&tail, 0.4, 200).unwrap();
        assert!(weaker.n0.unwrap() >= r.n0.unwrap());
    }

    #[test]
    fn merge_constants_for_two_two() {
        let sigma = shape(&[2, 2]);
        let big_c = bounded_layer_c(&sigma);
        assert!((big_c - 1.0 / 65536.0).abs() < 1e-20);
        let mc = merge_constants(&sigma, big_c).unwrap();
        // A = 2C²/(6²·2²·2²), B = e⁴/(2²·2²·0⁰).
        let a = 2.0 * big_c * big_c / (36.0 * 16.0);
        let b = 4f64.exp() / 16.0;
        assert!((mc.a_merge - a).abs() < 1e-12 * a);
        assert!((mc.b_merge - b).abs() < 1e-12 * b);
        let c = (a / (2.0 * b)).min(big_c) / 2.0;
        assert!((mc.c - c).abs() < 1e-12 * c);
        let expected = BigUint::from_f64((2.0 / c).floor()).unwrap() + 1u32;
        let rel = (mc.k_bound.to_f64().unwrap() - expected.to_f64().unwrap()).abs() / expected.to_f64().unwrap();
        assert!(rel < 1e-12);
    }

    #[test]
    fn merge_constants_other_shapes() {
        let sigma = shape(&[2, 1, 2]);
        let big_c = 1.0 / (2.0 * 125.0 * 3f64.powi(11));
        assert!((bounded_layer_c(&sigma) - big_c).abs() < 1e-12 * big_c);
        let mc = merge_constants(&sigma, big_c).unwrap();
        assert!(mc.c > 0.0 && mc.c < big_c);
        assert!(mc.k_bound > BigUint::zero());
        assert!(merge_constants(&shape(&[3, 2, 3]), 0.5).is_ok());
        assert!(merge_constants(&shape(&[2, 3]), 0.5).is_err());
        assert!(merge_constants(&shape(&[3, 1, 1, 3]), 0.5).is_err());
        assert!(merge_constants(&shape(&[2, 2]), 1.0).is_err());
    }

    #[test]
    fn threshold_examples() {
        let t = structure_thresholds(&shape(&[2, 2]), 0.1).unwrap();
        assert_eq!(t.klayers, 1.0 / 32768.0);
        assert!((t.pair_threshold - 0.025f64.powi(4) / 2.0).abs() < 1e-20);
        assert_eq!(t.segment_layer, 1.0 / 256.0);
        assert!(structure_thresholds(&shape(&[1, 1]), 0.1).is_err());
        assert!(structure_thresholds(&shape(&[2, 2]), 0.0).is_err());
    }

    #[test]
    fn epsilon_and_hypotheses() {
        assert_eq!(default_epsilon(&shape(&[2, 2]), &[0.3, 0.7]), Some(0.7));
        assert_eq!(default_epsilon(&shape(&[2, 1, 2]), &[0.3, 0.1, 0.6]), Some(0.1));
        assert_eq!(default_epsilon(&shape(&[2, 1, 2]), &[0.3, 0.7]), None);
        assert!(finite_layers_hypothesis(&shape(&[2, 2])));
        assert!(finite_layers_hypothesis(&shape(&[2, 1, 2])));
        assert!(finite_layers_hypothesis(&shape(&[3, 1, 3])));
        assert!(!finite_layers_hypothesis(&shape(&[3, 1, 1, 3])));
        assert!(!finite_layers_hypothesis(&shape(&[13, 1, 2])));
    }
}
