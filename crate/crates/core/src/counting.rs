//! Exact occurrence counting.
//!
//! [`count_bruteforce`] walks index subsets and is the reference every
//! faster path is checked against. [`count_layered`] handles the
//! layered-in-layered case with a prefix dynamic program: a copy of layer
//! `j` of the pattern must sit inside a single layer of the host, so
//!
//! ```text
//! count = Σ_{i₁<…<i_k} Π_j C(L_{i_j}, ℓ_j)
//! ```

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::bounds::merge_constants_unchecked;
use crate::error::{Error, Result};
use crate::perm::{LayeredShape, Permutation};

/// Default cap on host order for subset enumeration.
pub const BRUTEFORCE_GUARD: usize = 24;
/// Default cap on `n` for enumerating the `2^(n-1)` compositions of `n`.
pub const COMPOSITION_GUARD: usize = 22;
/// Default cap on `n` for enumerating all `n!` permutations.
pub const PERMUTATION_GUARD: usize = 9;

/// A non-negative occurrence count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BigCount(pub BigUint);

impl BigCount {
    pub fn zero() -> Self {
        BigCount(BigUint::zero())
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        BigCount(BigUint::from(v))
    }
}

impl From<u128> for BigCount {
    fn from(v: u128) -> Self {
        BigCount(BigUint::from(v))
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for BigCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_str_radix(10))
    }
}

/// `count / C(n, m)` for a pattern of order `m` in a host of order `n`,
/// kept alongside its reduced form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDensity {
    pub count: BigCount,
    /// `C(n, m)`.
    pub total: BigUint,
    pub numerator: BigUint,
    pub denominator: BigUint,
}

impl ExactDensity {
    pub fn new(count: BigCount, total: BigUint) -> Self {
        let g = count.0.gcd(&total);
        let (numerator, denominator) =
            if g.is_zero() { (BigUint::zero(), BigUint::one()) } else { (&count.0 / &g, &total / &g) };
        ExactDensity { count, total, numerator, denominator }
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.numerator, &self.denominator)
    }
}

impl fmt::Display for ExactDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

impl Serialize for ExactDensity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ExactDensity", 4)?;
        st.serialize_field("num", &self.numerator.to_str_radix(10))?;
        st.serialize_field("den", &self.denominator.to_str_radix(10))?;
        st.serialize_field("occurrences_over_total", &format!("{}/{}", self.count, self.total))?;
        st.serialize_field("approx", &self.to_f64())?;
        st.end()
    }
}

/// Converts `num/den` to the nearest-ish f64 without overflowing on huge operands.
pub(crate) fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = |x: &BigUint| x.bits().saturating_sub(60);
    let (sn, sd) = (shift(num), shift(den));
    let a = (num >> sn).to_f64().unwrap();
    let b = (den >> sd).to_f64().unwrap();
    (a / b) * 2f64.powi(sn as i32 - sd as i32)
}

/// `C(n, k)` as a big integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1).
        let num = acc.checked_mul((n - i) as u128)?;
        acc = num / (i + 1) as u128;
    }
    Some(acc)
}

/// Occurrences of `sigma` in `p`, by enumerating index subsets.
///
/// Returns zero when `sigma` is longer than `p`. The host order is capped at
/// [`BRUTEFORCE_GUARD`].
pub fn count_bruteforce(sigma: &Permutation, p: &Permutation) -> Result<BigCount> {
    count_bruteforce_with_guard(sigma, p, BRUTEFORCE_GUARD)
}

pub fn count_bruteforce_with_guard(sigma: &Permutation, p: &Permutation, guard: usize) -> Result<BigCount> {
    if p.order() > guard {
        return Err(Error::Resource {
            what: "host order for subset enumeration".into(),
            size: p.order(),
            limit: guard,
            hint: "use layered inputs for the dynamic-programming counter".into(),
        });
    }
    Ok(BigCount::from(count_subsets(sigma.values(), p.values())))
}

/// Subset enumeration that abandons a prefix as soon as its relative order
/// disagrees with the pattern's.
fn count_subsets(sigma: &[usize], p: &[usize]) -> u64 {
    fn rec(sigma: &[usize], p: &[usize], chosen: &mut Vec<usize>, start: usize) -> u64 {
        let j = chosen.len();
        if j == sigma.len() {
            return 1;
        }
        let needed = sigma.len() - j;
        let mut total = 0;
        for i in start..=p.len() - needed {
            let ok = chosen.iter().enumerate().all(|(t, &c)| (p[c] < p[i]) == (sigma[t] < sigma[j]));
            if ok {
                chosen.push(i);
                total += rec(sigma, p, chosen, i + 1);
                chosen.pop();
            }
        }
        total
    }
    if sigma.len() > p.len() {
        return 0;
    }
    rec(sigma, p, &mut Vec::with_capacity(sigma.len()), 0)
}

/// Occurrences of the layered pattern `sigma` in the layered host `pi`.
pub fn count_layered(sigma: &LayeredShape, pi: &LayeredShape) -> BigCount {
    match count_layered_u128(sigma.sizes(), pi.sizes()) {
        Some(v) => BigCount::from(v),
        None => BigCount(count_layered_big(sigma.sizes(), pi.sizes())),
    }
}

fn count_layered_u128(sigma: &[usize], pi: &[usize]) -> Option<u128> {
    let k = sigma.len();
    let mut dp = vec![0u128; k + 1];
    dp[0] = 1;
    for &len in pi {
        for j in (1..=k).rev() {
            if dp[j - 1] == 0 {
                continue;
            }
            let c = binomial_u128(len as u64, sigma[j - 1] as u64)?;
            dp[j] = dp[j].checked_add(dp[j - 1].checked_mul(c)?)?;
        }
    }
    Some(dp[k])
}

fn count_layered_big(sigma: &[usize], pi: &[usize]) -> BigUint {
    let k = sigma.len();
    let mut dp = vec![BigUint::zero(); k + 1];
    dp[0] = BigUint::one();
    for &len in pi {
        for j in (1..=k).rev() {
            if dp[j - 1].is_zero() {
                continue;
            }
            let c = binomial(len as u64, sigma[j - 1] as u64);
            let add = &dp[j - 1] * c;
            dp[j] += add;
        }
    }
    dp.pop().unwrap()
}

/// Exact density of `sigma` in `p`. Uses the layered counter when both are
/// layered and subset enumeration otherwise.
pub fn density(sigma: &Permutation, p: &Permutation) -> Result<ExactDensity> {
    if sigma.order() > p.order() {
        return Err(Error::arg(format!("pattern order {} exceeds host order {}", sigma.order(), p.order())));
    }
    let count = match (sigma.canonical_decomposition().shape(), p.canonical_decomposition().shape()) {
        (Some(s), Some(h)) => count_layered(s, h),
        _ => count_bruteforce(sigma, p)?,
    };
    Ok(ExactDensity::new(count, binomial(p.order() as u64, sigma.order() as u64)))
}

/// Density of a layered pattern in a layered host given by shapes.
pub fn density_layered(sigma: &LayeredShape, pi: &LayeredShape) -> Result<ExactDensity> {
    if sigma.order() > pi.order() {
        return Err(Error::arg(format!("pattern order {} exceeds host order {}", sigma.order(), pi.order())));
    }
    Ok(ExactDensity::new(count_layered(sigma, pi), binomial(pi.order() as u64, sigma.order() as u64)))
}

/// Best layered host of a fixed order, with every co-optimal composition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionSearchResult {
    pub best_shape: LayeredShape,
    pub best_count: BigCount,
    /// All co-optimal compositions in lexicographic order, `best_shape` first.
    pub ties: Vec<LayeredShape>,
    /// Number of compositions whose count was evaluated.
    pub evaluated: u64,
}

fn check_order(sigma: &LayeredShape, n: usize) -> Result<()> {
    if n < sigma.order() {
        return Err(Error::arg(format!("host order {n} is below pattern order {}", sigma.order())));
    }
    Ok(())
}

/// Maximizes [`count_layered`] over every composition of `n`.
pub fn best_layered_of_order(sigma: &LayeredShape, n: usize) -> Result<CompositionSearchResult> {
    best_layered_of_order_with_guard(sigma, n, COMPOSITION_GUARD)
}

pub fn best_layered_of_order_with_guard(
    sigma: &LayeredShape,
    n: usize,
    guard: usize,
) -> Result<CompositionSearchResult> {
    check_order(sigma, n)?;
    if n > guard {
        return Err(Error::Resource {
            what: "order for composition enumeration".into(),
            size: n,
            limit: guard,
            hint: "pass --pruned for the branch-and-bound search".into(),
        });
    }
    // Split on the first part so workers get disjoint lexicographic ranges.
    let per_first: Vec<(BigUint, Vec<Vec<usize>>, u64)> = (1..=n)
        .into_par_iter()
        .map(|first| {
            let mut best = BigUint::zero();
            let mut ties = Vec::new();
            let mut evaluated = 0u64;
            let mut cur = vec![first];
            enumerate_rest(n - first, &mut cur, &mut |comp| {
                evaluated += 1;
                let c = count_layered(sigma, &LayeredShape::new(comp.to_vec()).unwrap()).0;
                match c.cmp(&best) {
                    std::cmp::Ordering::Greater => {
                        best = c;
                        ties.clear();
                        ties.push(comp.to_vec());
                    }
                    std::cmp::Ordering::Equal => ties.push(comp.to_vec()),
                    std::cmp::Ordering::Less => {}
                }
            });
            (best, ties, evaluated)
        })
        .collect();
    let best = per_first.iter().map(|(b, _, _)| b.clone()).max().unwrap();
    let evaluated = per_first.iter().map(|(_, _, e)| e).sum();
    let ties: Vec<LayeredShape> = per_first
        .into_iter()
        .filter(|(b, _, _)| *b == best)
        .flat_map(|(_, t, _)| t)
        .map(|v| LayeredShape::new(v).unwrap())
        .collect();
    Ok(CompositionSearchResult { best_shape: ties[0].clone(), best_count: BigCount(best), ties, evaluated })
}

fn enumerate_rest(rem: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if rem == 0 {
        f(cur);
        return;
    }
    for part in 1..=rem {
        cur.push(part);
        enumerate_rest(rem - part, cur, f);
        cur.pop();
    }
}

/// Branch-and-bound variant of [`best_layered_of_order`].
///
/// A prefix of the host is scored by its partial embedding counts `dp[j]`
/// (first `j` pattern layers placed). The remaining `r` positions can add at
/// most `Σ_j dp[j]·C(r, m_j)`, where `m_j` is the order of the unplaced
/// pattern suffix, since every completion picks `m_j` of those positions.
/// Subtrees whose bound falls strictly below the incumbent are cut, so ties
/// survive.
pub fn best_layered_of_order_pruned(sigma: &LayeredShape, n: usize) -> Result<CompositionSearchResult> {
    check_order(sigma, n)?;
    let k = sigma.layer_count();
    let suffix_order: Vec<u64> = (0..=k).map(|j| sigma.sizes()[j..].iter().sum::<usize>() as u64).collect();

    struct Search<'a> {
        sigma: &'a [usize],
        suffix_order: &'a [u64],
        best: BigUint,
        ties: Vec<Vec<usize>>,
        evaluated: u64,
    }

    impl Search<'_> {
        fn bound(&self, dp: &[BigUint], rem: usize) -> BigUint {
            dp.iter().enumerate().map(|(j, v)| v * binomial(rem as u64, self.suffix_order[j])).sum()
        }

        fn rec(&mut self, dp: &[BigUint], rem: usize, cur: &mut Vec<usize>) {
            let k = self.sigma.len();
            if rem == 0 {
                self.evaluated += 1;
                match dp[k].cmp(&self.best) {
                    std::cmp::Ordering::Greater => {
                        self.best = dp[k].clone();
                        self.ties = vec![cur.clone()];
                    }
                    std::cmp::Ordering::Equal => self.ties.push(cur.clone()),
                    std::cmp::Ordering::Less => {}
                }
                return;
            }
            if self.bound(dp, rem) < self.best {
                return;
            }
            // Larger parts first reaches good incumbents early.
            for part in (1..=rem).rev() {
                let mut next = dp.to_vec();
                for j in (1..=k).rev() {
                    if !next[j - 1].is_zero() {
                        let add = &next[j - 1] * binomial(part as u64, self.sigma[j - 1] as u64);
                        next[j] += add;
                    }
                }
                cur.push(part);
                self.rec(&next, rem - part, cur);
                cur.pop();
            }
        }
    }

    let mut dp0 = vec![BigUint::zero(); k + 1];
    dp0[0] = BigUint::one();
    let mut search = Search {
        sigma: sigma.sizes(),
        suffix_order: &suffix_order,
        best: BigUint::zero(),
        ties: Vec::new(),
        evaluated: 0,
    };
    search.rec(&dp0, n, &mut Vec::new());
    let mut ties = search.ties;
    ties.sort();
    let ties: Vec<LayeredShape> = ties.into_iter().map(|v| LayeredShape::new(v).unwrap()).collect();
    Ok(CompositionSearchResult {
        best_shape: ties[0].clone(),
        best_count: BigCount(search.best),
        ties,
        evaluated: search.evaluated,
    })
}

/// Maximum number of occurrences of `sigma` over all permutations of order
/// `n`, with every maximizer in lexicographic order.
pub fn sigma_optimal_bruteforce(sigma: &Permutation, n: usize) -> Result<(BigCount, Vec<Permutation>)> {
    sigma_optimal_bruteforce_with_guard(sigma, n, PERMUTATION_GUARD)
}

pub fn sigma_optimal_bruteforce_with_guard(
    sigma: &Permutation,
    n: usize,
    guard: usize,
) -> Result<(BigCount, Vec<Permutation>)> {
    if n < sigma.order() {
        return Err(Error::arg(format!("host order {n} is below pattern order {}", sigma.order())));
    }
    if n > guard {
        return Err(Error::Resource {
            what: "order for full permutation enumeration".into(),
            size: n,
            limit: guard,
            hint: "restrict to layered hosts with `exact` without --all-permutations".into(),
        });
    }
    let perms = crate::perm::all_permutations(n);
    let counts: Vec<u64> = perms.par_iter().map(|p| count_subsets(sigma.values(), p.values())).collect();
    let best = counts.iter().copied().max().unwrap_or(0);
    let witnesses = perms.into_iter().zip(counts).filter(|(_, c)| *c == best).map(|(p, _)| p).collect();
    Ok((BigCount::from(best), witnesses))
}

/// Replaces layers `a` and `a + 1` (1-based) by one layer of their total size.
pub fn merge_layers(pi: &LayeredShape, a: usize) -> Result<LayeredShape> {
    let k = pi.layer_count();
    if a == 0 || a >= k {
        return Err(Error::arg(format!("merge index {a} outside 1..{k}")));
    }
    let s = pi.sizes();
    let mut out = Vec::with_capacity(k - 1);
    out.extend_from_slice(&s[..a - 1]);
    out.push(s[a - 1] + s[a]);
    out.extend_from_slice(&s[a + 1..]);
    LayeredShape::new(out)
}

/// One merge performed by [`merge_local_search`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeStep {
    /// 1-based index of the left layer of the merged pair.
    pub index: usize,
    pub merged_size: usize,
    pub count_before: BigCount,
    pub count_after: BigCount,
    /// Whether the pattern and host met the merge-lemma hypotheses for this
    /// step, with `C` taken as large as the host allows.
    pub hypotheses_held: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeSearchResult {
    pub shape: LayeredShape,
    pub steps: Vec<MergeStep>,
}

/// The lemma needs `ℓ₁ = ℓ_k ≥ 2` and a layer of size `ℓ₁` in every adjacent pair.
pub fn merge_shape_hypothesis(sigma: &LayeredShape) -> std::result::Result<(), String> {
    let s = sigma.sizes();
    let k = s.len();
    if k < 2 {
        return Err("pattern needs at least two layers".into());
    }
    if s[0] != s[k - 1] {
        return Err(format!("first layer {} differs from last layer {}", s[0], s[k - 1]));
    }
    if s[0] < 2 {
        return Err("first and last layers must have size at least 2".into());
    }
    if let Some(i) = (0..k - 1).find(|&i| s[i] != s[0] && s[i + 1] != s[0]) {
        return Err(format!(
            "adjacent layers {} and {} (sizes {}, {}) contain no layer of size {}",
            i + 1,
            i + 2,
            s[i],
            s[i + 1],
            s[0]
        ));
    }
    Ok(())
}

/// Whether a merge of the pair at `a` (1-based) in `pi` is covered by the
/// merge lemma for some `C`, given the threshold `c_threshold`.
///
/// The constant `c(C)` grows with `C`, while the requirement of `k` layers of
/// size at least `C|π|` caps `C` at the `k`-th largest layer over `|π|`; that
/// cap is the best choice.
pub fn merge_hypotheses_hold(sigma: &LayeredShape, pi: &LayeredShape, a: usize, c_threshold: f64) -> bool {
    if merge_shape_hypothesis(sigma).is_err() || a == 0 || a >= pi.layer_count() {
        return false;
    }
    let k = sigma.layer_count();
    let total = pi.order() as f64;
    let mut sorted = pi.sizes().to_vec();
    sorted.sort_unstable_by(|x, y| y.cmp(x));
    if sorted.len() < k {
        return false;
    }
    let big = sorted[k - 1] as f64;
    let c_big = big / total;
    if !(c_big > 0.0 && c_big < 1.0) || total < sigma.order() as f64 / c_big {
        return false;
    }
    let constants = merge_constants_unchecked(sigma, c_big);
    let limit = constants.c * total;
    let (x, y) = (pi.sizes()[a - 1] as f64, pi.sizes()[a] as f64);
    c_threshold <= constants.c && x <= limit && y <= limit
}

/// Repeatedly merges the leftmost adjacent pair whose sizes are both at most
/// `c_threshold·|π|` until no such pair remains.
///
/// Panics if a merge covered by the merge lemma lowers the count, or fails to
/// raise it when the merged layer reaches size `ℓ₁`.
pub fn merge_local_search(sigma: &LayeredShape, pi: &LayeredShape, c_threshold: f64) -> Result<MergeSearchResult> {
    if !(c_threshold > 0.0 && c_threshold < 1.0) {
        return Err(Error::arg(format!("threshold {c_threshold} outside (0, 1)")));
    }
    let limit = c_threshold * pi.order() as f64;
    let mut shape = pi.clone();
    let mut count = count_layered(sigma, &shape);
    let mut steps = Vec::new();
    loop {
        let s = shape.sizes();
        let Some(i) = (0..s.len().saturating_sub(1)).find(|&i| s[i] as f64 <= limit && s[i + 1] as f64 <= limit) else {
            break;
        };
        let merged_size = s[i] + s[i + 1];
        let held = merge_hypotheses_hold(sigma, &shape, i + 1, c_threshold);
        let next = merge_layers(&shape, i + 1)?;
        let next_count = count_layered(sigma, &next);
        if held {
            assert!(next_count >= count, "merge lowered the count under the lemma's hypotheses");
            if merged_size >= sigma.sizes()[0] {
                assert!(next_count > count, "merge to size ≥ ℓ₁ did not raise the count");
            }
        }
        steps.push(MergeStep {
            index: i + 1,
            merged_size,
            count_before: count,
            count_after: next_count.clone(),
            hypotheses_held: held,
        });
        shape = next;
        count = next_count;
    }
    Ok(MergeSearchResult { shape, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{all_permutations, realize};

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    fn shape(v: &[usize]) -> LayeredShape {
        LayeredShape::new(v.to_vec()).unwrap()
    }

    /// Plain enumeration of every index subset, with no pruning.
    fn naive_count(sigma: &Permutation, p: &Permutation) -> u64 {
        let (m, n) = (sigma.order(), p.order());
        if m > n {
            return 0;
        }
        (0u32..1 << n)
            .filter(|mask| mask.count_ones() as usize == m)
            .filter(|mask| {
                let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
                crate::perm::induced_pattern(p, &idx).unwrap() == *sigma
            })
            .count() as u64
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(binomial_u128(10_000, 2), Some(49_995_000));
        assert_eq!(binomial(100, 50).to_str_radix(10), "100891344545564193334812497256");
        assert_eq!(binomial_u128(200, 100), None);
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(count_bruteforce(&perm(&[2, 1]), &perm(&[3, 2, 1])).unwrap(), BigCount::from(3u64));
        assert_eq!(count_bruteforce(&perm(&[1, 3, 2]), &perm(&[1, 3, 2])).unwrap(), BigCount::from(1u64));
        let host = realize(&shape(&[2, 2, 2]));
        assert_eq!(count_bruteforce(&perm(&[2, 1, 4, 3]), &host).unwrap(), BigCount::from(3u64));
        assert_eq!(count_bruteforce(&perm(&[1, 2, 3]), &perm(&[1, 2])).unwrap(), BigCount::zero());
        let big = Permutation::identity(25);
        assert!(matches!(count_bruteforce(&perm(&[1]), &big), Err(Error::Resource { .. })));
    }

    #[test]
    fn pruned_enumeration_matches_naive_enumeration() {
        for n in 1..=6 {
            for p in all_permutations(n) {
                for m in 1..=3.min(n) {
                    for s in all_permutations(m) {
                        assert_eq!(count_subsets(s.values(), p.values()), naive_count(&s, &p));
                    }
                }
            }
        }
    }

    #[test]
    fn layered_examples() {
        assert_eq!(count_layered(&shape(&[1, 2]), &shape(&[2, 3])), BigCount::from(6u64));
        assert_eq!(count_layered(&shape(&[2, 2]), &shape(&[4, 4])), BigCount::from(36u64));
        assert_eq!(count_layered(&shape(&[2, 2]), &shape(&[2, 2])), BigCount::from(1u64));
        // Brute-force cross-checks of the same examples.
        assert_eq!(naive_count(&realize(&shape(&[1, 2])), &realize(&shape(&[2, 3]))), 6);
        assert_eq!(naive_count(&realize(&shape(&[2, 2])), &realize(&shape(&[4, 4]))), 36);
    }

    #[test]
    fn big_and_small_paths_agree() {
        let sigma = [3, 1, 2];
        let pi = [40, 3, 17, 1, 1, 25, 9];
        assert_eq!(BigUint::from(count_layered_u128(&sigma, &pi).unwrap()), count_layered_big(&sigma, &pi));
        // Forces the overflow fallback.
        let huge = [1usize << 40, 1 << 41, 1 << 40];
        assert!(count_layered_u128(&[3, 3, 3], &huge).is_none());
        let expected = binomial(1 << 40, 3) * binomial(1 << 41, 3) * binomial(1 << 40, 3);
        assert_eq!(count_layered(&shape(&[3, 3, 3]), &shape(&huge)).0, expected);
    }

    #[test]
    fn density_examples() {
        let d = density(&perm(&[2, 1]), &perm(&[3, 2, 1])).unwrap();
        assert_eq!((d.numerator.clone(), d.denominator.clone()), (BigUint::one(), BigUint::one()));
        let d = density(&realize(&shape(&[1, 2])), &realize(&shape(&[2, 3]))).unwrap();
        assert_eq!(d.count, BigCount::from(6u64));
        assert_eq!(d.total, BigUint::from(10u32));
        assert_eq!(d.to_string(), "3/5");
        let d = density(&perm(&[1, 2]), &perm(&[2, 1])).unwrap();
        assert!(d.numerator.is_zero());
        assert!(density(&perm(&[1, 2, 3]), &perm(&[1, 2])).is_err());
    }

    #[test]
    fn densities_of_all_patterns_sum_to_one() {
        for m in 1..=5 {
            let patterns = all_permutations(m);
            for n in m..=8 {
                for host in LayeredShape::compositions(n) {
                    let p = realize(&host);
                    let total: BigUint = patterns.iter().map(|s| count_bruteforce(s, &p).unwrap().0).sum();
                    assert_eq!(total, binomial(n as u64, m as u64), "{host} m={m}");
                }
            }
        }
    }

    #[test]
    fn best_composition_examples() {
        let r = best_layered_of_order(&shape(&[2, 2]), 8).unwrap();
        assert_eq!(r.best_shape, shape(&[4, 4]));
        assert_eq!(r.best_count, BigCount::from(36u64));
        assert_eq!(r.ties, vec![shape(&[4, 4])]);
        assert_eq!(r.evaluated, 128);
        let r = best_layered_of_order(&shape(&[2, 2]), 4).unwrap();
        assert_eq!(r.best_shape, shape(&[2, 2]));
        assert_eq!(r.best_count, BigCount::from(1u64));
        assert!(matches!(best_layered_of_order(&shape(&[2, 2]), 23), Err(Error::Resource { .. })));
        assert!(best_layered_of_order(&shape(&[2, 2]), 3).is_err());
    }

    #[test]
    fn exhaustive_composition_search_oracle() {
        // Independent reference: score every composition and sort.
        for sigma in [shape(&[2, 2]), shape(&[1, 2]), shape(&[2, 1, 2])] {
            for n in sigma.order()..=10 {
                let scored: Vec<(BigCount, LayeredShape)> = LayeredShape::compositions(n)
                    .into_iter()
                    .map(|c| (count_bruteforce(&realize(&sigma), &realize(&c)).unwrap(), c))
                    .collect();
                let best = scored.iter().map(|(c, _)| c.clone()).max().unwrap();
                let ties: Vec<LayeredShape> = scored.into_iter().filter(|(c, _)| *c == best).map(|(_, s)| s).collect();
                let r = best_layered_of_order(&sigma, n).unwrap();
                assert_eq!(r.best_count, best);
                assert_eq!(r.ties, ties);
                let p = best_layered_of_order_pruned(&sigma, n).unwrap();
                assert_eq!(p.best_count, best);
                assert_eq!(p.ties, ties);
            }
        }
    }

    #[test]
    fn pruned_search_goes_past_the_guard() {
        let r = best_layered_of_order_pruned(&shape(&[2, 2]), 30).unwrap();
        assert_eq!(r.best_shape, shape(&[15, 15]));
        assert!(r.evaluated < 1 << 29);
    }

    #[test]
    fn sigma_optimal_examples() {
        let (best, wit) = sigma_optimal_bruteforce(&perm(&[1, 2]), 5).unwrap();
        assert_eq!(best, BigCount::from(10u64));
        assert_eq!(wit, vec![Permutation::identity(5)]);
        let (best, _) = sigma_optimal_bruteforce(&perm(&[1, 3, 2]), 4).unwrap();
        assert_eq!(best, best_layered_of_order(&shape(&[1, 2]), 4).unwrap().best_count);
        // (3,3) realizes 3·3 occurrences of 2143 among S₆.
        let (best, wit) = sigma_optimal_bruteforce(&perm(&[2, 1, 4, 3]), 6).unwrap();
        assert_eq!(best, BigCount::from(9u64));
        assert!(wit.contains(&realize(&shape(&[3, 3]))));
        assert!(matches!(sigma_optimal_bruteforce(&perm(&[1]), 10), Err(Error::Resource { .. })));
    }

    #[test]
    fn merge_examples() {
        assert_eq!(merge_layers(&shape(&[2, 1, 1, 2]), 2).unwrap(), shape(&[2, 2, 2]));
        assert_eq!(merge_layers(&shape(&[3, 3]), 1).unwrap(), shape(&[6]));
        assert_eq!(merge_layers(&shape(&[13, 1, 2]), 1).unwrap(), shape(&[14, 2]));
        assert!(merge_layers(&shape(&[3, 3]), 2).is_err());
        assert!(merge_layers(&shape(&[3, 3]), 0).is_err());
    }

    #[test]
    fn merge_search_examples() {
        let r = merge_local_search(&shape(&[2, 2]), &shape(&[10, 1, 1, 10]), 0.1).unwrap();
        assert_eq!(r.shape, shape(&[10, 2, 10]));
        assert_eq!(r.steps.len(), 1);
        let r = merge_local_search(&shape(&[2, 2]), &shape(&[10, 10]), 0.49).unwrap();
        assert_eq!(r.shape, shape(&[10, 10]));
        assert!(r.steps.is_empty());
        let sigma = shape(&[2, 1, 2]);
        let start = shape(&[8, 1, 1, 1, 8]);
        let r = merge_local_search(&sigma, &start, 0.11).unwrap();
        assert!(r.shape.layer_count() < start.layer_count());
        assert!(count_layered(&sigma, &r.shape) >= count_layered(&sigma, &start));
        assert!(merge_local_search(&sigma, &start, 1.5).is_err());
    }

    #[test]
    fn merge_shape_hypothesis_cases() {
        assert!(merge_shape_hypothesis(&shape(&[2, 2])).is_ok());
        assert!(merge_shape_hypothesis(&shape(&[2, 1, 2])).is_ok());
        assert!(merge_shape_hypothesis(&shape(&[3, 2, 3])).is_ok());
        assert!(merge_shape_hypothesis(&shape(&[2, 3, 2])).is_ok());
        assert!(merge_shape_hypothesis(&shape(&[2, 3])).is_err());
        assert!(merge_shape_hypothesis(&shape(&[3, 1, 1, 3])).is_err());
        assert!(merge_shape_hypothesis(&shape(&[1, 1])).is_err());
        assert!(merge_shape_hypothesis(&shape(&[4])).is_err());
    }
}
