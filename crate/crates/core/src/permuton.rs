//! Layered-permuton analytics.
//!
//! For a pattern with layer sizes `(ℓ₁, …, ℓ_k)` of order `m` and a permuton
//! with layer lengths `(x₁, …, x_K)`,
//!
//! ```text
//! d(σ, Π) = m!/(ℓ₁!⋯ℓ_k!) · Σ_{i₁<…<i_k} Π_j x_{i_j}^{ℓ_j}
//! ```
//!
//! because a Π-random permutation equals σ exactly when its points split into
//! `k` groups of sizes `ℓ_j` landing in increasing layers. The sum is
//! evaluated with a prefix dynamic program; the gradient combines prefix and
//! suffix tables.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::counting::{self, binomial};
use crate::error::{Error, Result};
use crate::perm::{LayeredPermuton, LayeredShape, Permutation};

/// Density of a layered pattern in a layered permuton.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutonDensity {
    pub value: f64,
    /// `m!/(ℓ₁!⋯ℓ_k!)`.
    #[serde(serialize_with = "ser_biguint")]
    pub multinomial_coefficient: BigUint,
}

fn ser_biguint<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

/// Monte Carlo estimate of a pattern density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleStats {
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    /// Binomial standard error `sqrt(p(1-p)/trials)`.
    pub std_error: f64,
}

/// `m!/(ℓ₁!⋯ℓ_k!)` for the pattern's layer sizes.
pub fn multinomial(sigma: &LayeredShape) -> BigUint {
    let mut rest = sigma.order() as u64;
    let mut acc = BigUint::one();
    for &l in sigma.sizes() {
        acc *= binomial(rest, l as u64);
        rest -= l as u64;
    }
    acc
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `table[i][j]`: sum over increasing placements of pattern layers `0..j`
/// into host layers `0..i`.
fn prefix_table(ell: &[usize], xs: &[f64]) -> Vec<Vec<f64>> {
    let k = ell.len();
    let mut rows = Vec::with_capacity(xs.len() + 1);
    let mut acc = vec![Compensated::default(); k + 1];
    acc[0].add(1.0);
    rows.push(acc.iter().map(Compensated::value).collect::<Vec<_>>());
    for &x in xs {
        let prev: Vec<f64> = acc.iter().map(Compensated::value).collect();
        for j in 1..=k {
            if prev[j - 1] != 0.0 {
                acc[j].add(prev[j - 1] * x.powi(ell[j - 1] as i32));
            }
        }
        rows.push(acc.iter().map(Compensated::value).collect());
    }
    rows
}

/// `table[i][j]`: sum over increasing placements of pattern layers `j..k`
/// into host layers `i..K`.
fn suffix_table(ell: &[usize], xs: &[f64]) -> Vec<Vec<f64>> {
    let k = ell.len();
    let big_k = xs.len();
    let mut rows = vec![vec![0.0; k + 1]; big_k + 1];
    let mut acc = vec![Compensated::default(); k + 1];
    acc[k].add(1.0);
    rows[big_k] = acc.iter().map(Compensated::value).collect();
    for i in (0..big_k).rev() {
        let next: Vec<f64> = acc.iter().map(Compensated::value).collect();
        for j in (0..k).rev() {
            if next[j + 1] != 0.0 {
                acc[j].add(next[j + 1] * xs[i].powi(ell[j] as i32));
            }
        }
        rows[i] = acc.iter().map(Compensated::value).collect();
    }
    rows
}

/// `Σ_{i₁<…<i_k} Π_j x_{i_j}^{ℓ_j}` without the multinomial factor.
pub(crate) fn chain_sum(ell: &[usize], xs: &[f64]) -> f64 {
    if xs.len() < ell.len() {
        return 0.0;
    }
    prefix_table(ell, xs)[xs.len()][ell.len()]
}

/// Evaluates the density polynomial at an arbitrary non-negative vector
/// (not necessarily on the simplex).
pub fn density_polynomial(sigma: &LayeredShape, xs: &[f64]) -> f64 {
    let ell = sigma.sizes();
    if xs.len() < ell.len() {
        return 0.0;
    }
    let coeff = multinomial(sigma).to_f64().unwrap_or(f64::INFINITY);
    coeff * prefix_table(ell, xs)[xs.len()][ell.len()]
}

/// Gradient of [`density_polynomial`].
pub fn density_polynomial_gradient(sigma: &LayeredShape, xs: &[f64]) -> Vec<f64> {
    let ell = sigma.sizes();
    let k = ell.len();
    if xs.len() < k {
        return vec![0.0; xs.len()];
    }
    let coeff = multinomial(sigma).to_f64().unwrap_or(f64::INFINITY);
    let pre = prefix_table(ell, xs);
    let suf = suffix_table(ell, xs);
    xs.iter()
        .enumerate()
        .map(|(t, &x)| {
            let mut g = Compensated::default();
            for j in 0..k {
                let outer = pre[t][j] * suf[t + 1][j + 1];
                if outer != 0.0 {
                    g.add(ell[j] as f64 * x.powi(ell[j] as i32 - 1) * outer);
                }
            }
            coeff * g.value()
        })
        .collect()
}

pub fn permuton_density(sigma: &LayeredShape, perm: &LayeredPermuton) -> PermutonDensity {
    let multinomial_coefficient = multinomial(sigma);
    let value = density_polynomial(sigma, perm.lengths()).clamp(0.0, 1.0);
    PermutonDensity { value, multinomial_coefficient }
}

/// `∂d/∂x_t` for each layer `t`.
pub fn permuton_density_gradient(sigma: &LayeredShape, perm: &LayeredPermuton) -> Vec<f64> {
    density_polynomial_gradient(sigma, perm.lengths())
}

/// Draws a Π-random permutation of order `m`.
pub fn sample_permutation(perm: &LayeredPermuton, m: usize, seed: u64) -> Result<Permutation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_permutation_with(perm, m, &mut rng)
}

/// Layer boundaries `b₀ = 0 < b₁ < … < b_K = 1` as cumulative sums.
fn boundaries(perm: &LayeredPermuton) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = perm
        .lengths()
        .iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect();
    *out.last_mut().unwrap() = 1.0;
    out
}

/// Sampling works on x-coordinates only: a point's layer fixes its value
/// block, and inside a layer larger x means smaller y.
pub fn sample_permutation_with<R: Rng + ?Sized>(perm: &LayeredPermuton, m: usize, rng: &mut R) -> Result<Permutation> {
    if m == 0 {
        return Err(Error::arg("sample order must be at least 1"));
    }
    Ok(sample_with_bounds(&boundaries(perm), m, rng))
}

fn sample_with_bounds<R: Rng + ?Sized>(bounds: &[f64], m: usize, rng: &mut R) -> Permutation {
    let mut xs: Vec<f64> = Vec::with_capacity(m);
    while xs.len() < m {
        let x: f64 = rng.random();
        // Ties have probability zero; redraw the colliding point.
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let layer: Vec<usize> = xs.iter().map(|&x| bounds.partition_point(|&b| b <= x)).collect();
    // Positions in y-order: by layer, then by decreasing x.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_unstable_by(|&a, &b| layer[a].cmp(&layer[b]).then(b.cmp(&a)));
    let mut values = vec![0; m];
    for (rank, pos) in order.into_iter().enumerate() {
        values[pos] = rank + 1;
    }
    Permutation::from_vec_unchecked(values)
}

/// Fraction of `trials` Π-random permutations of order `|σ|` equal to σ.
pub fn estimate_density(sigma: &Permutation, perm: &LayeredPermuton, trials: u64, seed: u64) -> Result<SampleStats> {
    if trials == 0 {
        return Err(Error::arg("trials must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = boundaries(perm);
    let m = sigma.order();
    let hits = (0..trials).filter(|_| sample_with_bounds(&bounds, m, &mut rng) == *sigma).count() as u64;
    let estimate = hits as f64 / trials as f64;
    Ok(SampleStats { trials, hits, estimate, std_error: (estimate * (1.0 - estimate) / trials as f64).sqrt() })
}

/// The layered permuton whose layers have the same relative sizes and order
/// as those of `p`.
pub fn embed_permutation(p: &Permutation) -> Result<LayeredPermuton> {
    let shape = p
        .canonical_decomposition()
        .shape()
        .cloned()
        .ok_or_else(|| Error::arg(format!("permutation {p} is not layered")))?;
    Ok(embed_shape(&shape))
}

pub fn embed_shape(shape: &LayeredShape) -> LayeredPermuton {
    let n = shape.order() as f64;
    LayeredPermuton::from_weights(&shape.sizes().iter().map(|&l| l as f64 / n).collect::<Vec<_>>())
        .expect("layer sizes are positive")
}

/// Exact density of `sigma` in the permuton embedding the layered host `pi`:
/// `m!/(ℓ₁!⋯ℓ_k!) · Σ Π L_{i_j}^{ℓ_j} / n^m`.
pub fn embedded_density_exact(sigma: &LayeredShape, pi: &LayeredShape) -> BigRational {
    let ell = sigma.sizes();
    let k = ell.len();
    let mut dp = vec![BigUint::zero(); k + 1];
    dp[0] = BigUint::one();
    for &len in pi.sizes() {
        for j in (1..=k).rev() {
            if !dp[j - 1].is_zero() {
                let add = &dp[j - 1] * BigUint::from(len).pow(ell[j - 1] as u32);
                dp[j] += add;
            }
        }
    }
    let num = multinomial(sigma) * &dp[k];
    let den = BigUint::from(pi.order()).pow(sigma.order() as u32);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Outcome of comparing a permutation with its embedded permuton.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondProbCheck {
    /// `|d(σ, Π_p) − d(σ, p)|`.
    pub lhs: f64,
    /// `|σ|²/|p|`.
    pub rhs: f64,
    pub holds: bool,
    /// Exact `lhs` as `num/den`.
    pub lhs_exact: String,
}

/// Checks `|d(σ, Π_p) − d(σ, p)| ≤ |σ|²/|p|` in exact arithmetic.
pub fn condprob_bound_check(sigma: &LayeredShape, p: &Permutation) -> Result<CondProbCheck> {
    let host = p
        .canonical_decomposition()
        .shape()
        .cloned()
        .ok_or_else(|| Error::arg(format!("permutation {p} is not layered")))?;
    condprob_bound_check_shape(sigma, &host)
}

pub fn condprob_bound_check_shape(sigma: &LayeredShape, host: &LayeredShape) -> Result<CondProbCheck> {
    let (m, n) = (sigma.order(), host.order());
    let finite = counting::density_layered(sigma, host)?;
    let finite = BigRational::new(BigInt::from(finite.numerator), BigInt::from(finite.denominator));
    let lhs = (embedded_density_exact(sigma, host) - finite).abs();
    let rhs = BigRational::new(BigInt::from(m * m), BigInt::from(n));
    Ok(CondProbCheck {
        lhs: rational_to_f64(&lhs),
        rhs: rational_to_f64(&rhs),
        holds: lhs <= rhs,
        lhs_exact: format!("{}/{}", lhs.numer(), lhs.denom()),
    })
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    sign * counting::ratio_to_f64(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::realize;

    fn shape(v: &[usize]) -> LayeredShape {
        LayeredShape::new(v.to_vec()).unwrap()
    }

    fn permuton(v: &[f64]) -> LayeredPermuton {
        LayeredPermuton::from_weights(v).unwrap()
    }

    /// Direct sum over increasing index tuples.
    fn density_by_tuples(sigma: &[usize], xs: &[f64]) -> f64 {
        fn rec(sigma: &[usize], xs: &[f64], start: usize) -> f64 {
            if sigma.is_empty() {
                return 1.0;
            }
            (start..xs.len()).map(|i| xs[i].powi(sigma[0] as i32) * rec(&sigma[1..], xs, i + 1)).sum()
        }
        let s = LayeredShape::new(sigma.to_vec()).unwrap();
        multinomial(&s).to_f64().unwrap() * rec(sigma, xs, 0)
    }

    #[test]
    fn density_examples() {
        let d = permuton_density(&shape(&[1, 2]), &permuton(&[1.0, 2.0]));
        assert!((d.value - 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(d.multinomial_coefficient, BigUint::from(3u32));
        assert_eq!(permuton_density(&shape(&[2]), &permuton(&[1.0])).value, 1.0);
        assert_eq!(permuton_density(&shape(&[1, 1]), &permuton(&[1.0])).value, 0.0);
        assert_eq!(multinomial(&shape(&[13, 1, 2])), BigUint::from(1680u32));
    }

    #[test]
    fn dp_matches_tuple_sum() {
        let xs = [0.1, 0.25, 0.05, 0.3, 0.2, 0.1];
        for s in [vec![1, 2], vec![2, 2], vec![2, 1, 2], vec![1, 1, 1, 1], vec![3]] {
            let a = density_polynomial(&shape(&s), &xs);
            let b = density_by_tuples(&s, &xs);
            assert!((a - b).abs() < 1e-14 * b.max(1e-300), "{s:?}: {a} vs {b}");
        }
    }

    #[test]
    fn gradient_examples() {
        let g = permuton_density_gradient(&shape(&[1, 2]), &permuton(&[1.0, 2.0]));
        assert!((g[0] - 4.0 / 3.0).abs() < 1e-14);
        assert!((g[1] - 4.0 / 3.0).abs() < 1e-14);
        assert_eq!(permuton_density_gradient(&shape(&[2]), &permuton(&[1.0])), vec![2.0]);
        let g = permuton_density_gradient(&shape(&[1, 2, 1]), &permuton(&[0.5, 0.5]));
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn sampler_single_layer_is_decreasing() {
        let p = permuton(&[1.0]);
        for seed in 0..20 {
            let s = sample_permutation(&p, 6, seed).unwrap();
            assert_eq!(s.values(), &[6, 5, 4, 3, 2, 1]);
        }
        assert!(sample_permutation(&p, 0, 0).is_err());
    }

    #[test]
    fn sampler_two_halves_frequency() {
        let p = permuton(&[0.5, 0.5]);
        let dec = Permutation::new(vec![2, 1]).unwrap();
        let stats = estimate_density(&dec, &p, 200_000, 7).unwrap();
        assert!((stats.estimate - 0.5).abs() < 4.0 * stats.std_error, "{stats:?}");
        assert!(sample_permutation(&p, 40, 3).unwrap().is_layered());
    }

    #[test]
    fn estimate_examples() {
        let s = estimate_density(&Permutation::new(vec![2, 1]).unwrap(), &permuton(&[1.0]), 1000, 1).unwrap();
        assert_eq!(s.estimate, 1.0);
        assert_eq!(s.std_error, 0.0);
        let p231 = Permutation::new(vec![2, 3, 1]).unwrap();
        let s = estimate_density(&p231, &permuton(&[0.2, 0.3, 0.5]), 10_000, 2).unwrap();
        assert_eq!(s.hits, 0);
        assert!(estimate_density(&p231, &permuton(&[1.0]), 0, 0).is_err());
    }

    #[test]
    fn embed_examples() {
        assert_eq!(embed_permutation(&realize(&shape(&[2, 2]))).unwrap().lengths(), &[0.5, 0.5]);
        assert_eq!(
            embed_permutation(&realize(&shape(&[13, 1, 2]))).unwrap().lengths(),
            &[13.0 / 16.0, 1.0 / 16.0, 2.0 / 16.0]
        );
        assert_eq!(embed_permutation(&realize(&shape(&[4]))).unwrap().lengths(), &[1.0]);
        assert!(embed_permutation(&Permutation::new(vec![2, 3, 1]).unwrap()).is_err());
    }

    #[test]
    fn condprob_examples() {
        let c = condprob_bound_check(&shape(&[2]), &realize(&shape(&[2]))).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (0.0, 2.0, true));
        // 3·(2/5)(3/5)² = 54/125 against 6/10.
        let c = condprob_bound_check(&shape(&[1, 2]), &realize(&shape(&[2, 3]))).unwrap();
        assert_eq!(c.lhs_exact, "21/125");
        assert_eq!(c.rhs, 9.0 / 5.0);
        assert!(c.holds);
        assert!(condprob_bound_check(&shape(&[1]), &Permutation::new(vec![2, 3, 1]).unwrap()).is_err());
    }

    #[test]
    fn exact_embedding_agrees_with_float_density() {
        let pi = shape(&[5, 1, 3, 7]);
        let exact = rational_to_f64(&embedded_density_exact(&shape(&[2, 1, 2]), &pi));
        let float = permuton_density(&shape(&[2, 1, 2]), &embed_shape(&pi)).value;
        assert!((exact - float).abs() < 1e-15);
    }
}
