//! Maximization of the layered density polynomial over the simplex.
//!
//! Each start runs multiplicative-weights ascent with a backtracking step,
//! then a damped Newton polish on the simplex tangent space. Layers that collapse
//! below [`PRUNE_THRESHOLD`] are removed and the remainder is polished again.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::sigma_sums;
use crate::error::{Error, Result};
use crate::perm::{LayeredPermuton, LayeredShape};
use crate::permuton::{density_polynomial, density_polynomial_gradient};

pub const PRUNE_THRESHOLD: f64 = 1e-10;
pub const GEOMETRIC_RATIOS: [f64; 3] = [0.3, 0.5, 0.7];
/// Increments above this across [`DICHOTOMY_RUN`] consecutive `K` are
/// labelled as evidence of unboundedly many layers.
pub const DICHOTOMY_INCREMENT: f64 = 1e-9;
pub const DICHOTOMY_RUN: usize = 5;
pub const GOLDEN_TOLERANCE: f64 = 1e-10;
/// Size of the layer inserted into a `K`-optimum to seed `K+1`.
const INSERT_EPS: f64 = 1e-6;
const AGREEMENT_TOLERANCE: f64 = 1e-9;
const NEWTON_ITERS: usize = 200;
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptConfig {
    /// Dirichlet(1, …, 1) random starts on top of the deterministic seeds.
    pub restarts: usize,
    /// Budget of multiplicative-weights iterations per polish round.
    pub max_iters: usize,
    /// Bound on `max_i |g_i − mean(g)|` at the reported point.
    pub tol: f64,
    pub seed: u64,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig { restarts: 16, max_iters: 5000, tol: 1e-9, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult {
    pub lengths: LayeredPermuton,
    pub value: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    /// Starts whose final value is within 1e-9 of the best.
    pub restart_agreement: usize,
    pub converged: bool,
    /// `K` minus the number of layers in `lengths`.
    pub pruned_layers: usize,
    /// Projected-gradient infinity norm at `lengths`.
    pub stationarity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// `x_i ∝ r^{K−i}`: lengths grow along the diagonal.
    Increasing,
    /// `x_i ∝ r^{i−1}`.
    Decreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometricResult {
    pub ratio: f64,
    pub value: f64,
    pub orientation: Orientation,
    pub lengths: LayeredPermuton,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "K")]
    pub k: usize,
    pub value: f64,
    /// `value(K) − value(K−1)`; absent on the first row.
    pub increment: Option<f64>,
    pub pruned_layers: usize,
    pub converged: bool,
    pub argmax: LayeredPermuton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dichotomy {
    UnboundedLayersEvidence,
    PlateauEvidence,
    Inconclusive,
}

impl Dichotomy {
    pub fn note(self) -> &'static str {
        match self {
            Dichotomy::UnboundedLayersEvidence => {
                "heuristic: increments exceed 1e-9 for five consecutive K; not a proof"
            }
            Dichotomy::PlateauEvidence => "heuristic: trailing increments are at most 1e-9; not a proof",
            Dichotomy::Inconclusive => "heuristic: too few rows or mixed increments",
        }
    }
}

pub fn maximize_fixed_k(sigma: &LayeredShape, k: usize, config: &OptConfig) -> Result<OptResult> {
    maximize_fixed_k_from(sigma, k, config, &[])
}

/// Like [`maximize_fixed_k`] with additional warm starts. A warm start
/// shorter than `k` stands for a point whose missing layers have length 0.
pub fn maximize_fixed_k_from(
    sigma: &LayeredShape,
    k: usize,
    config: &OptConfig,
    warm: &[Vec<f64>],
) -> Result<OptResult> {
    if k == 0 {
        return Err(Error::arg("K must be at least 1"));
    }
    if warm.iter().any(|w| w.is_empty() || w.len() > k || w.iter().any(|x| !x.is_finite() || *x <= 0.0)) {
        return Err(Error::arg(format!("warm starts need 1..={k} positive lengths")));
    }
    if k < sigma.layer_count() {
        return Ok(OptResult {
            lengths: LayeredPermuton::new(vec![1.0 / k as f64; k]).expect("uniform point"),
            value: 0.0,
            iterations: 0,
            restarts_used: 0,
            restart_agreement: 0,
            converged: true,
            pruned_layers: 0,
            stationarity: 0.0,
        });
    }

    let mut starts = deterministic_starts(k);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.restarts {
        let w: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1).max(f64::MIN_POSITIVE)).collect();
        starts.push(normalized(w));
    }
    starts.extend(warm.iter().map(|w| normalized(w.clone())));

    let runs: Vec<Run> = starts.par_iter().map(|x0| polish(sigma, x0.clone(), config)).collect();
    let best = runs
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value).then_with(|| lex_cmp(&b.lengths, &a.lengths)))
        .expect("at least one start");
    let agreement = runs.iter().filter(|r| best.value - r.value <= AGREEMENT_TOLERANCE).count();
    let stationarity = projected_gradient_norm(sigma, &best.lengths);
    let lengths =
        LayeredPermuton::new(best.lengths.clone()).or_else(|_| LayeredPermuton::from_weights(&best.lengths))?;
    let value = density_polynomial(sigma, lengths.lengths());
    Ok(OptResult {
        pruned_layers: k - lengths.layer_count(),
        lengths,
        value,
        iterations: best.iterations,
        restarts_used: runs.len(),
        restart_agreement: agreement,
        converged: stationarity < config.tol,
        stationarity,
    })
}

fn deterministic_starts(k: usize) -> Vec<Vec<f64>> {
    let mut starts = vec![vec![1.0 / k as f64; k]];
    for r in GEOMETRIC_RATIOS {
        for o in [Orientation::Increasing, Orientation::Decreasing] {
            starts.push(geometric_profile(r, k, o));
        }
    }
    starts
}

fn normalized(mut w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or_else(|| a.len().cmp(&b.len()))
}

/// `max_i |g_i − mean(g)|`: the gradient projected onto the simplex tangent.
pub fn projected_gradient_norm(sigma: &LayeredShape, xs: &[f64]) -> f64 {
    let g = density_polynomial_gradient(sigma, xs);
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    g.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max)
}

struct Run {
    lengths: Vec<f64>,
    value: f64,
    iterations: usize,
}

fn polish(sigma: &LayeredShape, mut x: Vec<f64>, config: &OptConfig) -> Run {
    let mut iterations = 0;
    loop {
        iterations += mirror_ascent(sigma, &mut x, config.max_iters, config.tol);
        iterations += newton_polish(sigma, &mut x, config.tol);
        let before = x.len();
        x.retain(|&v| v >= PRUNE_THRESHOLD);
        if x.len() == before || x.is_empty() {
            break;
        }
        x = normalized(x);
    }
    let value = density_polynomial(sigma, &x);
    Run { lengths: x, value, iterations }
}

/// Multiplicative-weights ascent `x_i ← x_i·exp(η g_i)/Z` with `η` halved
/// from 1 until the objective does not decrease.
fn mirror_ascent(sigma: &LayeredShape, x: &mut Vec<f64>, max_iters: usize, tol: f64) -> usize {
    let mut f = density_polynomial(sigma, x);
    let mut stalled = 0;
    for it in 0..max_iters {
        let g = density_polynomial_gradient(sigma, x);
        let lambda: f64 = x.iter().zip(&g).map(|(a, b)| a * b).sum();
        let residual = x.iter().zip(&g).map(|(a, b)| a * (b - lambda).abs()).fold(0.0, f64::max);
        if residual < tol * 1e-3 {
            return it;
        }
        let gmax = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut eta = 1.0;
        let mut accepted = None;
        while eta > 1e-30 {
            let cand = normalized(
                x.iter().zip(&g).map(|(xi, gi)| (xi.ln() + eta * (gi - gmax)).exp().max(f64::MIN_POSITIVE)).collect(),
            );
            let fc = density_polynomial(sigma, &cand);
            if fc >= f {
                accepted = Some((cand, fc));
                break;
            }
            eta *= 0.5;
        }
        match accepted {
            Some((cand, fc)) => {
                let gain = fc - f;
                *x = cand;
                f = fc;
                stalled = if gain <= 1e-15 * f.abs().max(1e-300) { stalled + 1 } else { 0 };
                if stalled >= 20 {
                    return it + 1;
                }
            }
            None => return it,
        }
    }
    max_iters
}

/// Damped Newton ascent restricted to the simplex tangent space, with the
/// largest layer absorbing each step. Reduced Hessians are central
/// differences of the exact gradient along the tangent basis.
fn newton_polish(sigma: &LayeredShape, x: &mut Vec<f64>, tol: f64) -> usize {
    let n = x.len();
    if n < 2 {
        return 0;
    }
    let reference = (0..n).max_by(|&a, &b| x[a].total_cmp(&x[b])).unwrap();
    let free: Vec<usize> = (0..n).filter(|&i| i != reference).collect();
    let d = free.len();
    let reduced = |g: &[f64]| -> Vec<f64> { free.iter().map(|&i| g[i] - g[reference]).collect() };
    // x + t·(e_i − e_ref)
    let along = |x: &[f64], i: usize, t: f64| -> Vec<f64> {
        let mut y = x.to_vec();
        y[i] += t;
        y[reference] -= t;
        y
    };

    let mut f = density_polynomial(sigma, x);
    let mut residual = projected_gradient_norm(sigma, x);
    for it in 0..NEWTON_ITERS {
        if residual < tol * 1e-2 || x.iter().any(|&v| v < PRUNE_THRESHOLD) {
            return it;
        }
        let gr = reduced(&density_polynomial_gradient(sigma, x));
        let mut h = vec![vec![0.0; d]; d];
        for (j, &fj) in free.iter().enumerate() {
            let gp = reduced(&density_polynomial_gradient(sigma, &along(x, fj, FD_STEP)));
            let gm = reduced(&density_polynomial_gradient(sigma, &along(x, fj, -FD_STEP)));
            for (i, row) in h.iter_mut().enumerate() {
                row[j] = (gp[i] - gm[i]) / (2.0 * FD_STEP);
            }
        }
        let h: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| 0.5 * (h[i][j] + h[j][i])).collect()).collect();
        let Some(y) = ascent_direction(&h, &gr) else {
            return it;
        };
        let mut dx = vec![0.0; n];
        for (&i, &yi) in free.iter().zip(&y) {
            dx[i] = yi;
            dx[reference] -= yi;
        }
        // Stop short of the boundary; a layer driven to zero shrinks tenfold per step.
        let mut alpha: f64 =
            x.iter().zip(&dx).filter(|(_, &di)| di < 0.0).map(|(&xi, &di)| 0.9 * xi / -di).fold(1.0, f64::min);
        let mut moved = false;
        for _ in 0..40 {
            let cand = normalized(x.iter().zip(&dx).map(|(a, b)| a + alpha * b).collect());
            let fc = density_polynomial(sigma, &cand);
            let rc = projected_gradient_norm(sigma, &cand);
            let slack = 64.0 * f64::EPSILON * f.abs();
            if fc > f + slack || (fc >= f - slack && rc < residual) {
                *x = cand;
                f = fc;
                residual = rc;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            return it;
        }
    }
    NEWTON_ITERS
}

/// Solves `(μI − H)·s = g` for the smallest `μ ≥ 0` (on a geometric ladder)
/// that makes `μI − H` positive definite.
fn ascent_direction(h: &[Vec<f64>], g: &[f64]) -> Option<Vec<f64>> {
    let d = g.len();
    let scale = h.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let mut mu = 0.0;
    for _ in 0..60 {
        let a: Vec<Vec<f64>> =
            (0..d).map(|i| (0..d).map(|j| if i == j { mu - h[i][j] } else { -h[i][j] }).collect()).collect();
        if let Some(l) = cholesky(&a) {
            return Some(cholesky_solve(&l, g));
        }
        mu = if mu == 0.0 { 1e-12 * scale } else { mu * 10.0 };
    }
    None
}

fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let d = a.len();
    let mut l = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|p| l[i][p] * l[j][p]).sum::<f64>();
            if i == j {
                if s.is_nan() || s <= 0.0 {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let d = b.len();
    let mut y = vec![0.0; d];
    for i in 0..d {
        y[i] = (b[i] - (0..i).map(|p| l[i][p] * y[p]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; d];
    for i in (0..d).rev() {
        x[i] = (y[i] - (i + 1..d).map(|p| l[p][i] * x[p]).sum::<f64>()) / l[i][i];
    }
    x
}

/// Per-`K` optima for `K = k_min..=k_max`.
pub fn sweep_k(sigma: &LayeredShape, k_min: usize, k_max: usize, config: &OptConfig) -> Result<Vec<SweepRow>> {
    sweep_k_with_progress(sigma, k_min, k_max, config, |_| {})
}

/// [`sweep_k`] reporting each row as it completes. The optimum at `K` seeds
/// `K+1` both as is (one empty layer) and with a short layer inserted at
/// every position, so values never decrease along the sweep.
pub fn sweep_k_with_progress(
    sigma: &LayeredShape,
    k_min: usize,
    k_max: usize,
    config: &OptConfig,
    mut progress: impl FnMut(&SweepRow),
) -> Result<Vec<SweepRow>> {
    if k_min == 0 || k_max < k_min {
        return Err(Error::arg(format!("invalid K range {k_min}..={k_max}")));
    }
    let mut rows: Vec<SweepRow> = Vec::new();
    let mut previous: Option<Vec<f64>> = None;
    for k in k_min..=k_max {
        let warm = previous.as_deref().map(insertion_seeds).unwrap_or_default();
        let res = maximize_fixed_k_from(sigma, k, config, &warm)?;
        let row = SweepRow {
            k,
            value: res.value,
            increment: rows.last().map(|r| res.value - r.value),
            pruned_layers: res.pruned_layers,
            converged: res.converged,
            argmax: res.lengths.clone(),
        };
        progress(&row);
        if k >= sigma.layer_count() {
            previous = Some(res.lengths.lengths().to_vec());
        }
        rows.push(row);
    }
    Ok(rows)
}

fn insertion_seeds(x: &[f64]) -> Vec<Vec<f64>> {
    let mut seeds = vec![x.to_vec()];
    for pos in 0..=x.len() {
        let mut y = x.to_vec();
        y.insert(pos, INSERT_EPS);
        seeds.push(normalized(y));
    }
    seeds
}

/// Heuristic reading of a sweep's increments.
pub fn dichotomy(rows: &[SweepRow]) -> Dichotomy {
    let incs: Vec<f64> = rows.iter().filter_map(|r| r.increment).collect();
    if incs.len() < DICHOTOMY_RUN {
        return Dichotomy::Inconclusive;
    }
    if incs.windows(DICHOTOMY_RUN).any(|w| w.iter().all(|&d| d > DICHOTOMY_INCREMENT)) {
        return Dichotomy::UnboundedLayersEvidence;
    }
    if incs[incs.len() - DICHOTOMY_RUN..].iter().all(|&d| d <= DICHOTOMY_INCREMENT) {
        return Dichotomy::PlateauEvidence;
    }
    Dichotomy::Inconclusive
}

/// CSV with columns `K,value,increment,pruned_layers,argmax`, the argmax
/// lengths joined by semicolons.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("K,value,increment,pruned_layers,argmax\n");
    for r in rows {
        let inc = r.increment.map(|d| d.to_string()).unwrap_or_default();
        let argmax: Vec<String> = r.argmax.lengths().iter().map(f64::to_string).collect();
        out.push_str(&format!("{},{},{},{},{}\n", r.k, r.value, inc, r.pruned_layers, argmax.join(";")));
    }
    out
}

pub fn geometric_profile(r: f64, k: usize, orientation: Orientation) -> Vec<f64> {
    let w = (0..k)
        .map(|i| {
            let e = match orientation {
                Orientation::Increasing => k - 1 - i,
                Orientation::Decreasing => i,
            };
            r.powi(e as i32)
        })
        .collect();
    normalized(w)
}

/// Golden-section search for the best ratio `r ∈ (0, 1)` of a geometric
/// layer profile.
pub fn maximize_geometric(sigma: &LayeredShape, k: usize, orientation: Orientation) -> Result<GeometricResult> {
    if k == 0 {
        return Err(Error::arg("K must be at least 1"));
    }
    let objective = |r: f64| density_polynomial(sigma, &geometric_profile(r, k, orientation));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (1e-9, 1.0 - 1e-12);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    while b - a > GOLDEN_TOLERANCE {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    let ratio = if fc >= fd { c } else { d };
    let lengths = LayeredPermuton::from_weights(&geometric_profile(ratio, k, orientation))?;
    let value = density_polynomial(sigma, lengths.lengths());
    Ok(GeometricResult { ratio, value, orientation, lengths })
}

/// First-order conditions at a numerical optimum for patterns `(n, 1, …)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarityReport {
    pub n: usize,
    pub x1: f64,
    pub x2: f64,
    pub x1_ge_x2: bool,
    pub x1_ge_n_x2: bool,
    pub sigma1: f64,
    /// Informational only: the argument behind it changes the layer count.
    pub sigma1_le_x1_over_n: bool,
    pub slack: f64,
}

pub const STATIONARITY_SLACK: f64 = 1e-8;

pub fn stationarity_report(sigma: &LayeredShape, result: &OptResult) -> Result<StationarityReport> {
    let s = sigma.sizes();
    if s.len() < 3 || s[1] != 1 {
        return Err(Error::arg(format!("pattern {sigma} must have the form (n, 1, l1, ...) with a non-empty tail")));
    }
    let n = s[0];
    let tail = LayeredShape::new(s[2..].to_vec())?;
    let xs = result.lengths.lengths();
    let x1 = xs[0];
    let x2 = xs.get(1).copied().unwrap_or(0.0);
    let sums = sigma_sums(&tail, xs, n);
    let slack = STATIONARITY_SLACK;
    Ok(StationarityReport {
        n,
        x1,
        x2,
        x1_ge_x2: x1 >= x2 - slack,
        x1_ge_n_x2: x1 >= n as f64 * x2 - slack,
        sigma1: sums.sigma1,
        sigma1_le_x1_over_n: sums.sigma1 <= x1 / n as f64 + slack,
        slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::realize;
    use crate::permuton::embed_permutation;

    fn shape(s: &[usize]) -> LayeredShape {
        LayeredShape::new(s.to_vec()).unwrap()
    }

    fn quick() -> OptConfig {
        OptConfig { restarts: 4, ..OptConfig::default() }
    }

    #[test]
    fn two_layer_closed_forms() {
        // 3x(1−x)² peaks at x = 1/3.
        let r = maximize_fixed_k(&shape(&[1, 2]), 2, &quick()).unwrap();
        assert!((r.value - 4.0 / 9.0).abs() < 1e-12);
        assert!((r.lengths.lengths()[0] - 1.0 / 3.0).abs() < 1e-8);
        assert!(r.converged);
        // 6x²(1−x)² peaks at x = 1/2.
        let r = maximize_fixed_k(&shape(&[2, 2]), 2, &quick()).unwrap();
        assert!((r.value - 0.375).abs() < 1e-12);
        assert!((r.lengths.lengths()[0] - 0.5).abs() < 1e-8);
        let r = maximize_fixed_k(&shape(&[2]), 1, &quick()).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.lengths.lengths(), &[1.0]);
    }

    #[test]
    fn degenerate_and_pruned() {
        let r = maximize_fixed_k(&shape(&[1, 2]), 1, &quick()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(maximize_fixed_k(&shape(&[1, 2]), 0, &quick()).is_err());
        // Extra layers collapse for a single-layer pattern.
        let r = maximize_fixed_k(&shape(&[3]), 4, &quick()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.pruned_layers, 3);
    }

    #[test]
    fn sweep_examples() {
        let rows = sweep_k(&shape(&[1, 2]), 1, 2, &quick()).unwrap();
        assert_eq!(rows[0].value, 0.0);
        assert!((rows[1].value - 4.0 / 9.0).abs() < 1e-12);
        let rows = sweep_k(&shape(&[2, 2]), 2, 6, &quick()).unwrap();
        for r in &rows[1..] {
            assert!(r.increment.unwrap().abs() <= 1e-9, "{r:?}");
        }
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("K,value,increment,pruned_layers,argmax\n2,"));
        assert_eq!(csv.lines().count(), 6);
    }

    #[test]
    fn sweep_is_monotone() {
        let rows = sweep_k(&shape(&[1, 2]), 1, 8, &quick()).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].value >= w[0].value - 1e-12);
        }
        assert!(rows.iter().all(|r| r.value <= 2.0 * 3f64.sqrt() - 3.0 + 1e-9));
    }

    #[test]
    fn geometric_examples() {
        let g = maximize_geometric(&shape(&[1, 2]), 40, Orientation::Increasing).unwrap();
        assert!((g.value - (2.0 * 3f64.sqrt() - 3.0)).abs() < 1e-3);
        let g = maximize_geometric(&shape(&[2]), 1, Orientation::Increasing).unwrap();
        assert_eq!(g.value, 1.0);
        // Two layers: lengths (r, 1)/(1 + r) recover the fixed-K optimum at r = 1/2.
        let g = maximize_geometric(&shape(&[1, 2]), 2, Orientation::Increasing).unwrap();
        assert!((g.value - 4.0 / 9.0).abs() < 1e-12);
        assert!((g.ratio - 0.5).abs() < 1e-6);
    }

    #[test]
    fn stationarity_examples() {
        let sigma = shape(&[13, 1, 2]);
        let r = maximize_fixed_k(&sigma, 6, &quick()).unwrap();
        let rep = stationarity_report(&sigma, &r).unwrap();
        assert!(rep.x1_ge_x2 && rep.x1_ge_n_x2, "{rep:?}");
        let sigma = shape(&[2, 1, 2]);
        let r = maximize_fixed_k(&sigma, 4, &quick()).unwrap();
        assert_eq!(stationarity_report(&sigma, &r).unwrap().n, 2);
        assert!(stationarity_report(&shape(&[2, 2]), &r).is_err());
    }

    #[test]
    fn beats_embedded_composition() {
        let sigma = shape(&[2, 2]);
        let r = maximize_fixed_k(&sigma, 2, &quick()).unwrap();
        let emb = embed_permutation(&realize(&shape(&[4, 4]))).unwrap();
        assert!(r.value >= density_polynomial(&sigma, emb.lengths()) - 1e-15);
    }

    #[test]
    fn restarts_are_deterministic() {
        let sigma = shape(&[2, 1, 2]);
        let cfg = OptConfig { seed: 7, ..quick() };
        let a = maximize_fixed_k(&sigma, 5, &cfg).unwrap();
        let b = maximize_fixed_k(&sigma, 5, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.lengths, b.lengths);
    }

    #[test]
    fn dichotomy_labels() {
        let row = |k, inc: Option<f64>| SweepRow {
            k,
            value: 0.0,
            increment: inc,
            pruned_layers: 0,
            converged: true,
            argmax: LayeredPermuton::new(vec![1.0]).unwrap(),
        };
        let grow: Vec<_> = (1..8).map(|k| row(k, (k > 1).then_some(1e-6))).collect();
        assert_eq!(dichotomy(&grow), Dichotomy::UnboundedLayersEvidence);
        let flat: Vec<_> = (1..8).map(|k| row(k, (k > 1).then_some(0.0))).collect();
        assert_eq!(dichotomy(&flat), Dichotomy::PlateauEvidence);
        assert_eq!(dichotomy(&flat[..3]), Dichotomy::Inconclusive);
    }
}
