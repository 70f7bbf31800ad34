//! Reproducibility checks, one runner per acceptance criterion.
//!
//! Every runner is deterministic for fixed [`VerifyOptions`]; timing is left
//! to the caller.

use std::fmt::Display;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{self, bounded_layer_c, merge_constants, thirteen_chain};
use crate::counting::{best_layered_of_order, count_bruteforce, count_layered, merge_layers};
use crate::error::Result;
use crate::optimizer::{maximize_fixed_k, maximize_geometric, stationarity_report, sweep_k, OptConfig, Orientation};
use crate::perm::{realize, LayeredPermuton, LayeredShape, Permutation};
use crate::permuton::{
    condprob_bound_check_shape, density_polynomial, density_polynomial_gradient, estimate_density, permuton_density,
    sample_permutation_with,
};

/// `2√3 − 3`.
pub fn packing_132() -> f64 {
    2.0 * 3f64.sqrt() - 3.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// Largest `n` in the counterexample chain.
    pub horizon: usize,
    /// Random hosts in the conditional-probability check.
    pub trials: usize,
    /// Monte Carlo trials per grid pair.
    pub mc_trials: u64,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { horizon: 100, trials: 1000, mc_trials: 1_000_000, seed: 20_240_611, restarts: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
    /// What statement the record checks.
    pub reference: String,
}

impl CheckRecord {
    fn new(name: impl Into<String>, lhs: impl Display, rhs: impl Display, holds: bool, reference: &str) -> Self {
        CheckRecord {
            name: name.into(),
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            holds,
            reference: reference.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub key: &'static str,
    pub title: &'static str,
    pub holds: bool,
    pub summary: String,
    pub records: Vec<CheckRecord>,
}

/// Failures listed individually before the rest are only counted.
const FAILURE_RECORDS: usize = 20;

type CheckFn = fn(&VerifyOptions) -> Result<(String, Vec<CheckRecord>)>;

pub struct Criterion {
    pub id: usize,
    pub key: &'static str,
    pub title: &'static str,
    /// Wall-clock budget in seconds.
    pub budget_secs: u64,
    run: CheckFn,
}

impl Criterion {
    pub fn run(&self, options: &VerifyOptions) -> Result<CriterionReport> {
        let (summary, records) = (self.run)(options)?;
        Ok(CriterionReport {
            id: self.id,
            key: self.key,
            title: self.title,
            holds: !records.is_empty() && records.iter().all(|r| r.holds),
            summary,
            records,
        })
    }
}

pub const CRITERIA: [Criterion; 11] = [
    Criterion { id: 1, key: "oracle", title: "layered counts match brute force", budget_secs: 60, run: oracle },
    Criterion { id: 2, key: "packing-132", title: "132 packing density", budget_secs: 30, run: packing },
    Criterion { id: 3, key: "counterexample", title: "n0 = 13 inequality chain", budget_secs: 5, run: counterexample },
    Criterion {
        id: 4,
        key: "sweep-13-1-2",
        title: "(13,1,2) sweep grows strictly",
        budget_secs: 600,
        run: sweep_growth,
    },
    Criterion { id: 5, key: "plateau", title: "bounded-layer plateaus", budget_secs: 300, run: plateau },
    Criterion {
        id: 6,
        key: "stationarity",
        title: "x1 >= x2 and x1 >= n x2 at optima",
        budget_secs: 300,
        run: stationarity,
    },
    Criterion { id: 7, key: "condprob", title: "embedding discrepancy at most m^2/n", budget_secs: 120, run: condprob },
    Criterion { id: 8, key: "merge", title: "merging short layer pairs", budget_secs: 60, run: merge },
    Criterion { id: 9, key: "remark", title: "non-layered optimum count", budget_secs: 120, run: remark },
    Criterion { id: 10, key: "gradient", title: "gradient matches finite differences", budget_secs: 30, run: gradient },
    Criterion {
        id: 11,
        key: "monte-carlo",
        title: "sampler agrees with density formula",
        budget_secs: 120,
        run: monte_carlo,
    },
];

pub fn criterion(key: &str) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.key == key || c.id.to_string() == key)
}

fn shape(s: &[usize]) -> LayeredShape {
    LayeredShape::new(s.to_vec()).expect("non-empty positive shape")
}

fn config(options: &VerifyOptions) -> OptConfig {
    OptConfig { restarts: options.restarts, seed: options.seed, ..OptConfig::default() }
}

/// Aggregates a pass/fail stream into a tally record plus the first failures.
struct Tally {
    records: Vec<CheckRecord>,
    total: usize,
    failed: usize,
}

impl Tally {
    fn new() -> Self {
        Tally { records: Vec::new(), total: 0, failed: 0 }
    }

    fn push(&mut self, record: CheckRecord) {
        self.total += 1;
        if !record.holds {
            self.failed += 1;
            if self.failed <= FAILURE_RECORDS {
                self.records.push(record);
            }
        }
    }

    fn finish(mut self, name: &str, reference: &str) -> (String, Vec<CheckRecord>) {
        let summary = format!("{} of {} checks hold", self.total - self.failed, self.total);
        self.records.insert(
            0,
            CheckRecord::new(name, self.total - self.failed, self.total, self.failed == 0 && self.total > 0, reference),
        );
        (summary, self.records)
    }
}

fn random_composition(rng: &mut impl Rng, n: usize, cut: f64) -> LayeredShape {
    let mut sizes = vec![1];
    for _ in 1..n {
        if rng.random_bool(cut) {
            sizes.push(1);
        } else {
            *sizes.last_mut().unwrap() += 1;
        }
    }
    LayeredShape::new(sizes).unwrap()
}

fn oracle(_: &VerifyOptions) -> Result<(String, Vec<CheckRecord>)> {
    let mut tally = Tally::new();
    for m in 1..=4 {
        for sigma in LayeredShape::compositions(m) {
            let pattern = realize(&sigma);
            for n in 1..=8 {
                for host in LayeredShape::compositions(n) {
                    let fast = count_layered(&sigma, &host);
                    let slow = count_bruteforce(&pattern, &realize(&host))?;
                    let ok = fast == slow;
                    tally.push(CheckRecord::new(
                        format!("count({sigma}) in ({host})"),
                        fast,
                        slow,
                        ok,
                        "layered dynamic program equals subset enumeration",
                    ));
                }
            }
        }
    }
    Ok(tally.finish("agreeing cases", "every layered pattern of order <= 4 in every composition host of order <= 8"))
}

fn packing(options: &VerifyOptions) -> Result<(String, Vec<CheckRecord>)> {
    let sigma = shape(&[1, 2]);
    let target = packing_132();
    let geo = maximize_geometric(&sigma, 40, Orientation::Increasing)?;
    let mut records = vec![CheckRecord::new(
        "geometric profile, K = 40",
        geo.value,
        target - 1e-3,
        geo.value >= target - 1e-3,
        "132 packing density 2*sqrt(3) - 3 is approached by geometric layers",
    )];
    let rows = sweep_k(&sigma, 1, 12, &config(options))?;
    let top = rows.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
    records.push(CheckRecord::new(
        "max sweep value, K = 1..12",
        top,
        target + 1e-9,
        top <= target + 1e-9,
        "no finite layered profile beats the 132 packing density",
    ));
    Ok((format!("geometric {:.10}, sweep max {:.10}, target {:.10}", geo.value, top, target), records))
}

fn counterexample(options: &VerifyOptions) -> Result<(String, Vec<CheckRecord>)> {
    let d_prime = packing_132();
    let reference = "pattern (n,1,2): lower bound beats the stationarity upper bound for n >= 13";
    let mut records = Vec::new();
    for n in 13..=options.horizon.max(13) {
        let chain = thirteen_chain(n, d_prime)?;
        records.push(CheckRecord::new(
            format!("n={n}: lower_bound / unit > 0.33"),
            chain.lower_ratio,
            chain.lower_threshold,
            chain.lower_ratio > chain.lower_threshold,
            reference,
        ));
        records.push(CheckRecord::new(
            format!("n={n}: upper estimate / unit < 0.19"),
            chain.upper_estimate_ratio,
            chain.upper_threshold,
            chain.upper_estimate_ratio < chain.upper_threshold,
            reference,
        ));
        records.push(CheckRecord::new(
            format!("n={n}: lower_bound > rhs_bound"),
            chain.lower_ratio,
            chain.rhs_ratio,
            chain.lower_ratio > chain.rhs_ratio,
            reference,
        ));
        records.push(CheckRecord::new(format!("n={n}: full chain"), chain.holds(), true, chain.holds(), reference));
    }
    let n0 = bounds::find_n0(&shape(&[2]), d_prime, options.horizon.max(13))?;
    records.push(CheckRecord::new(
        "smallest n with contradiction",
        n0.n0.map_or("none".to_string(), |v| v.to_string()),
        13,
        n0.n0.is_some_and(|v| v <= 13) && n0.persistent,
        "the contradiction sets in by n = 13 and persists",
    ));
    let held = records.iter().filter(|r| r.holds).count();
    Ok((format!("{held} of {} inequalities hold for n in 13..={}", records.len(), options.horizon.max(13)), records))
}

fn sweep_growth(options: &VerifyOptions) -> Result<(String, Vec<CheckRecord>)> {
    let rows = sweep_k(&shape(&[13, 1, 2]), 3, 12, &config(options))?;
    let mut records = Vec::new();
    for r in &rows {
        records.push(CheckRecord::new(
            format!("K={} converged", r.k),
            r.converged,
            true,
            r.converged,
            "sweep optimum is first-order stationary",
        ));
        if let Some(inc) = r.increment {
            records.push(CheckRecord::new(
                format!("K={} increment", r.k),
                format!("{inc:e}"),
                "1e-10",
                inc > 1e-10,
                "optimal value keeps growing with the layer count",
            ));
        }
    }
    let incs: Vec<String> = rows.iter().filter_map(|r| r.increment).map(|d| format!("{d:.2e}")).collect();
    Ok((format!("increments {}", incs.join(" ")), records))
}

fn plateau(options: &VerifyOptions) -> Result<(String, Vec<CheckRecord>)> {
    let cfg = config(options);
    let mut records = Vec::new();
    let mut summary = Vec::new();
    for s in [vec![2, 2], vec![2, 1, 2]] {
        let sigma = shape(&s);
        let rows = sweep_k(&sigma, 1, 8, &cfg)?;
        let top = rows.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
        let first = rows.iter().position(|r| r.value >= top - 1e-9).expect("non-empty sweep");
        let k_star = rows[first].k;
        for r in &rows[first + 1..] {
            let inc = r.increment.unwrap_or(0.0);
            records.push(CheckRecord::new(
                format!("({sigma}) K={} increment", r.k),
                format!("{inc:e}"),
                "1e-9",
                inc <= 1e-9,
                "values stop growing once the optimal layer count is reached",
            ));
        }
        let mc = merge_constants(&sigma, bounded_layer_c(&sigma))?;
        records.push(CheckRecord::new(
            format!("({sigma}) plateau K <= K_bound"),
            k_star,
            &mc.k_bound,
            BigUint::from(k_star) <= mc.k_bound,
            "plateau layer count respects the explicit layer bound",
        ));
        if s == [2, 2] {
            let v2 = rows.iter().find(|r| r.k == 2).expect("K = 2 row").value;
            records.push(CheckRecord::new(
                "(2,2) K=2 value",
                v2,
                0.375,
                (v2 - 0.375).abs() <= 1e-10,
                "6x^2(1-x)^2 peaks at 3/8",
            ));
        }
        summary.push(format!("({sigma}) plateau at K={k_star} value {top:.12}"));
    }
    Ok((summary.join("; "), records))
}

fn stationarity(options: &VerifyOptions) -> Result<(String, Vec<CheckRecord>)> {
    let cfg = config(options);
    let mut records = Vec::new();
    let mut converged = 0;
    let mut total = 0;
    for n in [5, 13, 20] {
        let sigma = shape(&[n, 1, 2]);
        for k in 4..=8 {
            let res = maximize_fixed_k(&sigma, k, &cfg)?;
            total += 1;
            if !res.converged {
                continue;
            }
            converged += 1;
            let rep = stationarity_report(&sigma, &res)?;
            records.push(CheckRecord::new(
                format!("({sigma}) K={k}: x1 >= x2"),
                rep.x1,
                rep.x2,
                rep.x1_ge_x2,
                "swapping the first two layers cannot help",
            ));
            records.push(CheckRecord::new(
                format!("({sigma}) K={k}: x1 >= n x2"),
                rep.x1,
                n as f64 * rep.x2,
                rep.x1_ge_n_x2,
                "moving mass between the first two layers cannot help",
            ));
        }
    }
    Ok((format!("{converged} of {total} optima converged"), records))
}

fn condprob(options: &VerifyOptions) -> Result<(String, Vec<CheckRecord>)> {
    let patterns = [shape(&[1, 2]), shape(&[2, 2]), shape(&[2, 1, 2])];
    let reference = "|d(sigma, embedded pi) - d(sigma, pi)| <= |sigma|^2/|pi|";
    let check = |tally: &mut Tally, sigma: &LayeredShape, host: &LayeredShape| -> Result<()> {
        let c = condprob_bound_check_shape(sigma, host)?;
        tally.push(CheckRecord::new(format!("({sigma}) in ({host})"), c.lhs_exact, c.rhs, c.holds, reference));
        Ok(())
    };
    let mut exhaustive = Tally::new();
    for sigma in &patterns {
        for n in sigma.order()..=8 {
            for host in LayeredShape::compositions(n) {
                check(&mut exhaustive, sigma, &host)?;
            }
        }
    }
    let mut random = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    for i in 0..options.trials {
        let sigma = &patterns[i % patterns.len()];
        let n = rng.random_range(sigma.order()..=200);
        let cut = [0.05, 0.2, 0.5, 0.9][rng.random_range(0..4)];
        check(&mut random, sigma, &random_composition(&mut rng, n, cut))?;
    }
    let (s1, mut records) = exhaustive.finish("every layered host of order <= 8 within bound", reference);
    let (s2, more) = random.finish("random layered hosts of order <= 200 within bound", reference);
    records.extend(more);
    Ok((format!("exhaustive: {s1}; random: {s2}"), records))
}

const MERGE_PATTERNS: [&[usize]; 6] = [&[2, 2], &[2, 1, 2], &[3, 3], &[3, 2, 3], &[2, 2, 2], &[3, 1, 3]];

/// A host with `k` to `k+2` big layers of size at least `C|π|` and one
/// adjacent pair of short layers, both at most `c|π|`.
pub fn merge_instance(rng: &mut impl Rng) -> Result<(LayeredShape, f64, LayeredShape, usize)> {
    loop {
        let sigma = shape(MERGE_PATTERNS[rng.random_range(0..MERGE_PATTERNS.len())]);
        let bigs = sigma.layer_count() + rng.random_range(0..=2);
        let big_c = rng.random_range(0.05..0.3f64).min(0.8 / bigs as f64);
        let c = merge_constants(&sigma, big_c)?.c;
        let pair = (rng.random_range(1..=3usize), rng.random_range(1..=3usize));
        let pair_max = pair.0.max(pair.1) as f64;
        let base = (2.0 * pair_max / c).max(sigma.order() as f64 / big_c).ceil() / bigs as f64;
        let mut sizes: Vec<usize> = (0..bigs).map(|_| (base * rng.random_range(1.0..1.2)).ceil() as usize).collect();
        let at = rng.random_range(0..=bigs);
        sizes.insert(at, pair.1);
        sizes.insert(at, pair.0);
        let host = LayeredShape::new(sizes)?;
        let total = host.order() as f64;
        let big_layers = host.sizes().iter().filter(|&&s| s as f64 >= big_c * total).count();
        let ok = total >= sigma.order() as f64 / big_c && big_layers >= sigma.layer_count() && pair_max <= c * total;
        if ok {
            return Ok((sigma, big_c, host, at + 1));
        }
    }
}

fn merge(options: &VerifyOptions) -> Result<(String, Vec<CheckRecord>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0x6d65_7267);
    let mut tally = Tally::new();
    let mut strict = 0;
    for _ in 0..100 {
        let (sigma, big_c, host, a) = merge_instance(&mut rng)?;
        let merged = merge_layers(&host, a)?;
        let before = count_layered(&sigma, &host);
        let after = count_layered(&sigma, &merged);
        let merged_size = host.sizes()[a - 1] + host.sizes()[a];
        let needs_strict = merged_size >= sigma.sizes()[0];
        strict += needs_strict as usize;
        let ok = if needs_strict { after > before } else { after >= before };
        tally.push(CheckRecord::new(
            format!("({sigma}), C={big_c:.4}, merge {a} in {} layers", host.layer_count()),
            after,
            before,
            ok,
            if needs_strict { "merged layer of size >= l1 raises the count" } else { "merging never lowers the count" },
        ));
    }
    let (summary, records) = tally.finish("merges behaving as predicted", "merge of two short adjacent layers");
    Ok((format!("{summary}; {strict} needed strict growth"), records))
}

fn remark(_: &VerifyOptions) -> Result<(String, Vec<CheckRecord>)> {
    let sigma = shape(&[4, 1]);
    let mut host: Vec<usize> = (1..=16).rev().collect();
    host.extend([17, 19, 20, 18]);
    let host = Permutation::new(host)?;
    let direct = count_bruteforce(&realize(&sigma), &host)?;
    let best = best_layered_of_order(&sigma, 20)?;
    let ok = direct == best.best_count;
    let records = vec![
        CheckRecord::new(
            "count in 16..1,17,19,20,18 vs best layered count",
            &direct,
            &best.best_count,
            ok,
            "a non-layered permutation attains the layered optimum for (4,1)",
        ),
        CheckRecord::new(
            "host is not layered",
            host.is_layered(),
            false,
            !host.is_layered(),
            "the witness is not layered",
        ),
    ];
    Ok((format!("count {direct}, best layered {} at ({})", best.best_count, best.best_shape), records))
}

fn gradient(options: &VerifyOptions) -> Result<(String, Vec<CheckRecord>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0x6772_6164);
    let mut tally = Tally::new();
    let h = 1e-6;
    for _ in 0..100 {
        let m = rng.random_range(1..=6);
        let sigma = random_composition(&mut rng, m, 0.5);
        let k = rng.random_range(1..=8);
        let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let perm = LayeredPermuton::from_weights(&w)?;
        let xs = perm.lengths();
        let g = density_polynomial_gradient(&sigma, xs);
        for t in 0..k {
            let mut up = xs.to_vec();
            let mut dn = xs.to_vec();
            up[t] += h;
            dn[t] -= h;
            let fd = (density_polynomial(&sigma, &up) - density_polynomial(&sigma, &dn)) / (2.0 * h);
            let err = (g[t] - fd).abs();
            let ok = err <= 1e-9 || err <= 1e-6 * fd.abs();
            tally.push(CheckRecord::new(
                format!("({sigma}) at {perm}, coordinate {t}"),
                g[t],
                fd,
                ok,
                "analytic vs central difference",
            ));
        }
    }
    Ok(tally.finish("coordinates within tolerance", "density gradient against central differences"))
}

/// The fixed grid of pattern/permuton pairs for Monte Carlo checks.
pub fn monte_carlo_grid() -> Vec<(LayeredShape, LayeredPermuton)> {
    let pairs: [(&[usize], &[f64]); 10] = [
        (&[1, 2], &[0.3, 0.7]),
        (&[2, 1], &[0.5, 0.5]),
        (&[2, 2], &[0.5, 0.5]),
        (&[1, 1], &[0.25, 0.25, 0.25, 0.25]),
        (&[2], &[0.2, 0.3, 0.5]),
        (&[1, 2], &[0.05, 0.1, 0.15, 0.3, 0.4]),
        (&[2, 1, 2], &[0.35, 0.15, 0.15, 0.35]),
        (&[3, 1], &[0.6, 0.4]),
        (&[1, 2, 1], &[0.2, 0.3, 0.3, 0.2]),
        (&[3, 3], &[0.5, 0.2, 0.3]),
    ];
    pairs
        .iter()
        .map(|(s, x)| (shape(s), LayeredPermuton::new(x.to_vec()).expect("grid point on the simplex")))
        .collect()
}

fn monte_carlo(options: &VerifyOptions) -> Result<(String, Vec<CheckRecord>)> {
    let mut records = Vec::new();
    for (i, (sigma, perm)) in monte_carlo_grid().into_iter().enumerate() {
        let exact = permuton_density(&sigma, &perm).value;
        let est = estimate_density(&realize(&sigma), &perm, options.mc_trials, options.seed.wrapping_add(i as u64))?;
        let dev = (est.estimate - exact).abs();
        records.push(CheckRecord::new(
            format!("({sigma}) in ({perm}): |estimate - exact| <= 4 se"),
            dev,
            4.0 * est.std_error,
            dev <= 4.0 * est.std_error,
            "sampled frequency matches the closed-form density",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0x6c61_7965);
    let grid = monte_carlo_grid();
    let draws = 100_000;
    let mut bad = 0;
    for i in 0..draws {
        let perm = &grid[i % grid.len()].1;
        if !sample_permutation_with(perm, 10, &mut rng)?.is_layered() {
            bad += 1;
        }
    }
    records.push(CheckRecord::new(
        format!("non-layered samples in {draws} draws of order 10"),
        bad,
        0,
        bad == 0,
        "samples from layered permutons are layered",
    ));
    let held = records.iter().filter(|r| r.holds).count();
    Ok((format!("{held} of {} checks hold", records.len()), records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_resolve() {
        assert_eq!(criterion("counterexample").unwrap().id, 3);
        assert_eq!(criterion("7").unwrap().key, "condprob");
        assert!(criterion("nope").is_none());
    }

    #[test]
    fn merge_instances_meet_hypotheses() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (sigma, big_c, host, a) = merge_instance(&mut rng).unwrap();
            let c = merge_constants(&sigma, big_c).unwrap().c;
            let total = host.order() as f64;
            assert!(host.sizes()[a - 1] as f64 <= c * total && host.sizes()[a] as f64 <= c * total);
            assert!(total >= sigma.order() as f64 / big_c);
        }
    }

    #[test]
    fn quick_criteria_pass() {
        let opts = VerifyOptions { horizon: 20, trials: 30, mc_trials: 20_000, ..VerifyOptions::default() };
        for key in ["counterexample", "remark", "gradient", "merge"] {
            let rep = criterion(key).unwrap().run(&opts).unwrap();
            assert!(rep.holds, "{key}: {}", rep.summary);
        }
    }
}
