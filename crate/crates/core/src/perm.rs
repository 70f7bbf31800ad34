//! Permutations, layered shapes and finite-layer permutons.
//!
//! Everything here uses 1-indexed one-line notation: a permutation of order
//! `n` is the sequence `p(1) … p(n)`, and index arguments are 1-based too.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation in one-line notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

/// Layer sizes `(ℓ₁, …, ℓ_k)` of a layered permutation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct LayeredShape(Vec<usize>);

/// A layered permuton with finitely many layers, given by the lengths of its
/// layers from left to right. Every length is strictly positive and the
/// lengths sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LayeredPermuton(Vec<f64>);

/// Result of [`canonical_decomposition`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposition {
    Layered(LayeredShape),
    /// Positions `i < j < k` (1-based) inducing 231 or 312.
    NotLayered {
        witness: [usize; 3],
    },
}

impl Decomposition {
    pub fn shape(&self) -> Option<&LayeredShape> {
        match self {
            Decomposition::Layered(s) => Some(s),
            Decomposition::NotLayered { .. } => None,
        }
    }

    pub fn is_layered(&self) -> bool {
        matches!(self, Decomposition::Layered(_))
    }
}

/// Splits on whitespace and commas, returning each token with its 1-based
/// column.
fn tokens(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() || c == ',' {
            if let Some(s) = start.take() {
                out.push((s + 1, &text[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &text[s..]));
    }
    out.into_iter()
}

fn parse_positive_list(text: &str) -> Result<Vec<usize>> {
    let mut values = Vec::new();
    for (column, tok) in tokens(text) {
        let v: usize =
            tok.parse().map_err(|_| Error::Parse { column, message: format!("`{tok}` is not a positive integer") })?;
        if v == 0 {
            return Err(Error::Parse { column, message: "values must be positive".into() });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Parse { column: 1, message: "empty input".into() });
    }
    Ok(values)
}

impl Permutation {
    /// Validates that `values` is a bijection on `1..=n`.
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::Validation("permutation must have order at least 1".into()));
        }
        let mut seen = vec![false; n + 1];
        for &v in &values {
            if v == 0 || v > n {
                return Err(Error::Validation(format!("value {v} outside 1..={n}")));
            }
            if seen[v] {
                let missing = (1..=n).find(|&u| !seen[u] && !values.contains(&u));
                return Err(Error::Validation(match missing {
                    Some(m) => format!("value {v} repeated ({m} missing)"),
                    None => format!("value {v} repeated"),
                }));
            }
            seen[v] = true;
        }
        Ok(Permutation(values))
    }

    /// Builds a permutation without validation. Callers guarantee bijectivity.
    pub(crate) fn from_vec_unchecked(values: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(values.clone()).is_ok());
        Permutation(values)
    }

    pub fn identity(n: usize) -> Self {
        Permutation((1..=n).collect())
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn canonical_decomposition(&self) -> Decomposition {
        canonical_decomposition(self)
    }

    pub fn is_layered(&self) -> bool {
        layer_sizes(&self.0).is_some()
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_permutation(s)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, &self.0, " ")
    }
}

fn write_joined<T: fmt::Display>(f: &mut fmt::Formatter<'_>, xs: &[T], sep: &str) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl LayeredShape {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::arg("a layered shape needs at least one layer"));
        }
        if sizes.contains(&0) {
            return Err(Error::arg("layer sizes must be positive"));
        }
        Ok(LayeredShape(sizes))
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    /// Number of layers `k`.
    pub fn layer_count(&self) -> usize {
        self.0.len()
    }

    /// Order `m = ℓ₁ + … + ℓ_k`.
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn realize(&self) -> Permutation {
        realize(self)
    }

    /// Whether two adjacent layers both have size one.
    pub fn has_consecutive_singletons(&self) -> bool {
        self.0.windows(2).any(|w| w[0] == 1 && w[1] == 1)
    }

    /// All compositions of `n`, in lexicographic order.
    pub fn compositions(n: usize) -> Vec<LayeredShape> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(rem: usize, cur: &mut Vec<usize>, out: &mut Vec<LayeredShape>) {
            if rem == 0 {
                out.push(LayeredShape(cur.clone()));
                return;
            }
            for part in 1..=rem {
                cur.push(part);
                rec(rem - part, cur, out);
                cur.pop();
            }
        }
        if n > 0 {
            rec(n, &mut cur, &mut out);
        }
        out
    }
}

impl FromStr for LayeredShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_shape(s)
    }
}

impl TryFrom<Vec<usize>> for LayeredShape {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        LayeredShape::new(v)
    }
}

impl From<LayeredShape> for Vec<usize> {
    fn from(s: LayeredShape) -> Self {
        s.0
    }
}

impl fmt::Display for LayeredShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, &self.0, ",")
    }
}

/// Absolute tolerance on `Σ xᵢ = 1` for a valid permuton.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// Largest deviation from one that text input may have before it is
/// renormalized rather than rejected.
pub const LOAD_NORMALIZE_TOLERANCE: f64 = 1e-9;

impl LayeredPermuton {
    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::arg("a permuton needs at least one layer"));
        }
        if let Some(x) = lengths.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::arg(format!("layer length {x} is not strictly positive")));
        }
        let sum: f64 = lengths.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::arg(format!("layer lengths sum to {sum}, not 1")));
        }
        Ok(LayeredPermuton(lengths))
    }

    /// Rescales positive weights onto the simplex.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(Error::arg("weights must have a positive finite sum"));
        }
        LayeredPermuton::new(weights.iter().map(|w| w / sum).collect())
    }

    /// Parses comma-separated decimals. Input whose sum is within
    /// [`LOAD_NORMALIZE_TOLERANCE`] of one is renormalized, anything further
    /// off is rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lengths = Vec::new();
        for (column, tok) in tokens(text) {
            let v = parse_decimal(tok)
                .ok_or_else(|| Error::Parse { column, message: format!("`{tok}` is not a decimal number") })?;
            lengths.push(v);
        }
        if lengths.is_empty() {
            return Err(Error::Parse { column: 1, message: "empty input".into() });
        }
        let sum: f64 = lengths.iter().sum();
        if (sum - 1.0).abs() >= LOAD_NORMALIZE_TOLERANCE {
            return Err(Error::arg(format!(
                "layer lengths sum to {sum}; must be within {LOAD_NORMALIZE_TOLERANCE:e} of 1"
            )));
        }
        if let Some(x) = lengths.iter().find(|x| **x <= 0.0) {
            return Err(Error::arg(format!("layer length {x} is not strictly positive")));
        }
        LayeredPermuton::from_weights(&lengths)
    }

    pub fn lengths(&self) -> &[f64] {
        &self.0
    }

    /// Number of layers `K`.
    pub fn layer_count(&self) -> usize {
        self.0.len()
    }

    /// Support segments `(x_start, x_end, y_start, y_end)`, one per layer.
    /// Each layer `[a, b]` carries the slope −1 segment from `(a, b)` to `(b, a)`.
    pub fn support_segments(&self) -> Vec<[f64; 4]> {
        let mut a = 0.0;
        let k = self.0.len();
        self.0
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let b = if i + 1 == k { 1.0 } else { a + x };
                let seg = [a, b, b, a];
                a = b;
                seg
            })
            .collect()
    }

    /// CSV export of [`support_segments`](Self::support_segments) with a header row.
    pub fn support_csv(&self) -> String {
        let mut out = String::from("x_start,x_end,y_start,y_end\n");
        for s in self.support_segments() {
            out.push_str(&format!("{},{},{},{}\n", s[0], s[1], s[2], s[3]));
        }
        out
    }
}

/// Accepts plain decimals and `p/q` fractions.
fn parse_decimal(tok: &str) -> Option<f64> {
    if let Some((p, q)) = tok.split_once('/') {
        let p: f64 = p.parse().ok()?;
        let q: f64 = q.parse().ok()?;
        return (q != 0.0).then(|| p / q);
    }
    tok.parse().ok()
}

impl TryFrom<Vec<f64>> for LayeredPermuton {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        LayeredPermuton::new(v)
    }
}

impl From<LayeredPermuton> for Vec<f64> {
    fn from(p: LayeredPermuton) -> Self {
        p.0
    }
}

impl fmt::Display for LayeredPermuton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, &self.0, ",")
    }
}

/// Parses a permutation given as whitespace- or comma-separated integers.
pub fn parse_permutation(text: &str) -> Result<Permutation> {
    Permutation::new(parse_positive_list(text)?)
}

/// Parses layer sizes such as `13,1,2`.
pub fn parse_shape(text: &str) -> Result<LayeredShape> {
    LayeredShape::new(parse_positive_list(text)?)
}

/// Layer sizes if `values` is layered: each layer must list a block of
/// consecutive values in decreasing order, blocks increasing left to right.
fn layer_sizes(values: &[usize]) -> Option<Vec<usize>> {
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let top = values[i];
        if top <= i {
            return None;
        }
        let len = top - i;
        if i + len > values.len() {
            return None;
        }
        for (offset, &v) in values[i..i + len].iter().enumerate() {
            if v != top - offset {
                return None;
            }
        }
        sizes.push(len);
        i += len;
    }
    Some(sizes)
}

/// Finds positions (1-based) of a 231 or 312 occurrence in O(n²).
fn forbidden_witness(p: &[usize]) -> Option<[usize; 3]> {
    let n = p.len();
    // 231: i < j < k with p[k] < p[i] < p[j].
    for j in 1..n {
        let best_i = (0..j).filter(|&i| p[i] < p[j]).max_by_key(|&i| p[i]);
        if let Some(i) = best_i {
            if let Some(k) = (j + 1..n).find(|&k| p[k] < p[i]) {
                return Some([i + 1, j + 1, k + 1]);
            }
        }
    }
    // 312: i < j < k with p[j] < p[k] < p[i].
    for j in 1..n {
        let i = (0..j).max_by_key(|&i| p[i]).unwrap();
        if p[i] < p[j] {
            continue;
        }
        if let Some(k) = (j + 1..n).find(|&k| p[j] < p[k] && p[k] < p[i]) {
            return Some([i + 1, j + 1, k + 1]);
        }
    }
    None
}

/// Decomposes `p` into its layers, or returns a 231/312 witness.
pub fn canonical_decomposition(p: &Permutation) -> Decomposition {
    match layer_sizes(&p.0) {
        Some(sizes) => Decomposition::Layered(LayeredShape(sizes)),
        None => Decomposition::NotLayered {
            witness: forbidden_witness(&p.0).expect("a permutation without layered structure contains 231 or 312"),
        },
    }
}

/// The layered permutation with the given layer sizes.
pub fn realize(shape: &LayeredShape) -> Permutation {
    let mut values = Vec::with_capacity(shape.order());
    let mut base = 0;
    for &len in &shape.0 {
        values.extend((base + 1..=base + len).rev());
        base += len;
    }
    Permutation(values)
}

/// The pattern induced by the (1-based, strictly increasing) `indices`.
pub fn induced_pattern(p: &Permutation, indices: &[usize]) -> Result<Permutation> {
    if indices.is_empty() {
        return Err(Error::arg("index set must be nonempty"));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > p.order()) {
        return Err(Error::arg(format!("index {bad} outside 1..={}", p.order())));
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::arg("indices must be strictly increasing"));
    }
    Ok(pattern_of(indices.iter().map(|&i| p.0[i - 1])))
}

/// Rank-reduces a sequence of distinct values to a permutation.
pub(crate) fn pattern_of(values: impl Iterator<Item = usize>) -> Permutation {
    let vals: Vec<usize> = values.collect();
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_unstable_by_key(|&i| vals[i]);
    let mut out = vec![0; vals.len()];
    for (rank, i) in order.into_iter().enumerate() {
        out[i] = rank + 1;
    }
    Permutation(out)
}

/// All permutations of order `n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut cur: Vec<usize> = (1..=n).collect();
    let mut out = vec![Permutation(cur.clone())];
    // Standard next-permutation step.
    while let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) {
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(Permutation(cur.clone()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    fn shape(v: &[usize]) -> LayeredShape {
        LayeredShape::new(v.to_vec()).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_permutation("1").unwrap(), perm(&[1]));
        assert_eq!(parse_permutation("2 1 4 3").unwrap(), perm(&[2, 1, 4, 3]));
        assert_eq!(parse_permutation("2,1, 4\t3").unwrap(), perm(&[2, 1, 4, 3]));
        let err = parse_permutation("1 1 2").unwrap_err();
        assert!(matches!(&err, Error::Validation(m) if m.contains("1 repeated") && m.contains("3 missing")), "{err}");
        assert!(matches!(parse_permutation("1 x"), Err(Error::Parse { column: 3, .. })));
        assert!(parse_permutation("").is_err());
        assert!(parse_permutation("0 1").is_err());
        assert!(parse_permutation("1 4").is_err());
    }

    #[test]
    fn decomposition_examples() {
        assert_eq!(perm(&[2, 1, 4, 3]).canonical_decomposition(), Decomposition::Layered(shape(&[2, 2])));
        assert_eq!(perm(&[1, 3, 2]).canonical_decomposition(), Decomposition::Layered(shape(&[1, 2])));
        assert_eq!(perm(&[2, 3, 1]).canonical_decomposition(), Decomposition::NotLayered { witness: [1, 2, 3] });
        assert_eq!(perm(&[3, 1, 2]).canonical_decomposition(), Decomposition::NotLayered { witness: [1, 2, 3] });
    }

    #[test]
    fn realize_examples() {
        assert_eq!(realize(&shape(&[2, 2])), perm(&[2, 1, 4, 3]));
        let mut expected: Vec<usize> = (1..=13).rev().collect();
        expected.extend([14, 16, 15]);
        assert_eq!(realize(&shape(&[13, 1, 2])), perm(&expected));
        assert_eq!(realize(&shape(&[1, 1, 1])), perm(&[1, 2, 3]));
    }

    #[test]
    fn induced_examples() {
        let p = perm(&[2, 1, 4, 3]);
        assert_eq!(induced_pattern(&p, &[1, 3]).unwrap(), perm(&[1, 2]));
        assert_eq!(induced_pattern(&p, &[3, 4]).unwrap(), perm(&[2, 1]));
        let dec = perm(&[5, 4, 3, 2, 1]);
        for idx in [[1, 2, 3], [1, 3, 5], [2, 4, 5]] {
            assert_eq!(induced_pattern(&dec, &idx).unwrap(), perm(&[3, 2, 1]));
        }
        assert!(induced_pattern(&p, &[]).is_err());
        assert!(induced_pattern(&p, &[0, 1]).is_err());
        assert!(induced_pattern(&p, &[2, 5]).is_err());
        assert!(induced_pattern(&p, &[3, 2]).is_err());
        assert!(induced_pattern(&p, &[2, 2]).is_err());
    }

    #[test]
    fn round_trip_all_compositions_up_to_ten() {
        for n in 1..=10 {
            let comps = LayeredShape::compositions(n);
            assert_eq!(comps.len(), 1 << (n - 1));
            for s in comps {
                let p = realize(&s);
                assert_eq!(p.canonical_decomposition(), Decomposition::Layered(s.clone()));
                let all: Vec<usize> = (1..=p.order()).collect();
                assert_eq!(induced_pattern(&p, &all).unwrap(), p);
            }
        }
    }

    fn brute_contains_231_or_312(p: &[usize]) -> bool {
        let n = p.len();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (a, b, c) = (p[i], p[j], p[k]);
                    if (c < a && a < b) || (b < c && c < a) {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn layered_iff_avoids_231_and_312() {
        for n in 1..=6 {
            for p in all_permutations(n) {
                let d = p.canonical_decomposition();
                assert_eq!(!d.is_layered(), brute_contains_231_or_312(p.values()), "{p}");
                if let Decomposition::NotLayered { witness } = d {
                    let pat = induced_pattern(&p, &witness).unwrap();
                    assert!(pat == perm(&[2, 3, 1]) || pat == perm(&[3, 1, 2]), "{p} {witness:?}");
                }
            }
        }
    }

    #[test]
    fn all_permutations_counts() {
        assert_eq!(all_permutations(1).len(), 1);
        assert_eq!(all_permutations(5).len(), 120);
    }

    #[test]
    fn permuton_validation_and_parsing() {
        assert!(LayeredPermuton::new(vec![0.5, 0.5]).is_ok());
        assert!(LayeredPermuton::new(vec![0.5, 0.4]).is_err());
        assert!(LayeredPermuton::new(vec![1.0, 0.0]).is_err());
        assert!(LayeredPermuton::new(vec![]).is_err());
        let p = LayeredPermuton::parse("0.3333333333, 0.6666666667").unwrap();
        assert!((p.lengths().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let p = LayeredPermuton::parse("1/3,2/3").unwrap();
        assert!((p.lengths()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!(LayeredPermuton::parse("0.3,0.6").is_err());
        assert!(matches!(LayeredPermuton::parse("0.5,abc"), Err(Error::Parse { column: 5, .. })));
    }

    #[test]
    fn support_segments_follow_the_antidiagonal() {
        let p = LayeredPermuton::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(p.support_segments(), vec![[0.0, 0.25, 0.25, 0.0], [0.25, 1.0, 1.0, 0.25]]);
        assert!(p.support_csv().starts_with("x_start,x_end,y_start,y_end\n0,0.25,0.25,0\n"));
    }
}
