//! One function per subcommand, each returning the result part of a report.

use std::time::Instant;

use layerpack::bounds::{
    bounded_layer_c, counterexample_analysis, default_epsilon, find_n0, finite_layers_hypothesis, merge_constants,
    structure_thresholds, thirteen_chain,
};
use layerpack::counting::{
    best_layered_of_order, best_layered_of_order_pruned, binomial, count_bruteforce, count_layered,
    merge_shape_hypothesis, sigma_optimal_bruteforce,
};
use layerpack::optimizer::{
    dichotomy, maximize_fixed_k, maximize_geometric, stationarity_report, sweep_csv, sweep_k_with_progress,
    GeometricResult, OptConfig, Orientation, SweepRow, DICHOTOMY_INCREMENT, GOLDEN_TOLERANCE, PRUNE_THRESHOLD,
    STATIONARITY_SLACK,
};
use layerpack::perm::{LOAD_NORMALIZE_TOLERANCE, SIMPLEX_TOLERANCE};
use layerpack::permuton::{
    condprob_bound_check_shape, embed_permutation, embed_shape, estimate_density, permuton_density,
    permuton_density_gradient, sample_permutation,
};
use layerpack::verify::{criterion, packing_132, VerifyOptions, CRITERIA};
use layerpack::{realize, ExactDensity, LayeredShape, Permutation};
use serde_json::{json, Value};

use crate::report::{CliError, Outcome, Status};
use crate::{BoundsAction, CountArgs, DPrime, DensityArgs, EmbedArgs, ExactArgs, Format, OptimizeArgs, OrientationArg};
use crate::{SampleArgs, VerifyArgs};

/// Layer count of the geometric profile that supplies the default `d'`.
const D_PRIME_LAYERS: usize = 40;

/// Standard errors allowed between a Monte Carlo estimate and the exact value.
const MC_SIGMAS: f64 = 4.0;

fn shape_of(p: &Permutation) -> Option<LayeredShape> {
    p.canonical_decomposition().shape().cloned()
}

pub fn count(a: &CountArgs) -> Result<Outcome, CliError> {
    let pattern = match (&a.pattern, &a.pattern_shape) {
        (Some(p), _) => p.clone(),
        (None, Some(s)) => realize(s),
        (None, None) => unreachable!("clap requires one pattern input"),
    };
    let (host_shape, host) = match (&a.host, &a.host_shape) {
        (Some(p), _) => (shape_of(p), None),
        (None, Some(s)) => (Some(s.clone()), Some(s)),
        (None, None) => unreachable!("clap requires one host input"),
    };
    let host_order = a.host.as_ref().map_or_else(|| host.map_or(0, |s| s.order()), |p| p.order());
    if pattern.order() > host_order {
        return Err(CliError::Usage(format!("pattern order {} exceeds host order {host_order}", pattern.order())));
    }
    let pattern_shape = shape_of(&pattern);
    let (method, count) = match (&pattern_shape, &host_shape, a.oracle) {
        (Some(s), Some(h), false) => ("layered-dp", count_layered(s, h)),
        _ => {
            let host_perm = a.host.clone().unwrap_or_else(|| realize(host.expect("host shape")));
            ("bruteforce", count_bruteforce(&pattern, &host_perm)?)
        }
    };
    let total = binomial(host_order as u64, pattern.order() as u64);
    let density = ExactDensity::new(count.clone(), total);
    Ok(Outcome::json(json!({
        "pattern": pattern,
        "pattern_shape": pattern_shape,
        "host_order": host_order,
        "host_shape": host_shape,
        "method": method,
        "count": count,
        "density": density,
    })))
}

pub fn density(a: &DensityArgs) -> Result<Outcome, CliError> {
    let d = permuton_density(&a.pattern, &a.permuton);
    let gradient = permuton_density_gradient(&a.pattern, &a.permuton);
    Ok(Outcome::json(json!({
        "pattern": a.pattern,
        "K": a.permuton.layer_count(),
        "lengths": a.permuton,
        "value": d.value,
        "multinomial_coefficient": d.multinomial_coefficient.to_string(),
        "gradient": gradient,
    }))
    .tolerance("simplex", SIMPLEX_TOLERANCE)
    .tolerance("load_normalize", LOAD_NORMALIZE_TOLERANCE))
}

fn layer_counts(a: &OptimizeArgs) -> (usize, usize) {
    match (a.k, a.sweep) {
        (Some(k), _) => (k, k),
        (None, Some(r)) => (r.from, r.to),
        (None, None) => unreachable!("clap requires --K or --sweep"),
    }
}

pub fn optimize(a: &OptimizeArgs) -> Result<Outcome, CliError> {
    if a.tol.is_nan() || a.tol <= 0.0 {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", a.tol)));
    }
    let (from, to) = layer_counts(a);
    if from == 0 {
        return Err(CliError::Usage("--K must be at least 1".into()));
    }
    let outcome = if a.geometric { optimize_geometric(a, from, to)? } else { optimize_free(a, from, to)? };
    Ok(outcome
        .tolerance("tol", a.tol)
        .tolerance("prune_threshold", PRUNE_THRESHOLD)
        .tolerance("golden_tolerance", GOLDEN_TOLERANCE)
        .tolerance("dichotomy_increment", DICHOTOMY_INCREMENT)
        .tolerance("stationarity_slack", STATIONARITY_SLACK))
}

fn optimize_free(a: &OptimizeArgs, from: usize, to: usize) -> Result<Outcome, CliError> {
    let config = OptConfig { restarts: a.restarts, max_iters: a.max_iters, tol: a.tol, seed: a.seed };
    let sweeping = a.sweep.is_some();
    let (result, rows) = if sweeping {
        let rows = sweep_k_with_progress(&a.pattern, from, to, &config, |r| {
            eprintln!("K={:<3} value={:.15} converged={}", r.k, r.value, r.converged);
        })?;
        let d = dichotomy(&rows);
        let result = json!({
            "rows": rows,
            "all_converged": rows.iter().all(|r| r.converged),
            "dichotomy": d,
            "dichotomy_note": d.note(),
        });
        (result, rows)
    } else {
        let res = maximize_fixed_k(&a.pattern, from, &config)?;
        let row = SweepRow {
            k: from,
            value: res.value,
            increment: None,
            pruned_layers: res.pruned_layers,
            converged: res.converged,
            argmax: res.lengths.clone(),
        };
        let result = json!({
            "K": from,
            "optimum": res,
            "stationarity": stationarity_report(&a.pattern, &res).ok(),
        });
        (result, vec![row])
    };
    let status = if rows.iter().all(|r| r.converged) { Status::Success } else { Status::NotConverged };
    let csv = (a.format == Format::Csv).then(|| sweep_csv(&rows));
    Ok(Outcome::json(result).seed(a.seed).csv(csv).status(status))
}

fn best_geometric(sigma: &LayeredShape, k: usize, orientation: OrientationArg) -> Result<GeometricResult, CliError> {
    let run = |o| maximize_geometric(sigma, k, o);
    Ok(match orientation {
        OrientationArg::Increasing => run(Orientation::Increasing)?,
        OrientationArg::Decreasing => run(Orientation::Decreasing)?,
        OrientationArg::Best => {
            let inc = run(Orientation::Increasing)?;
            let dec = run(Orientation::Decreasing)?;
            if dec.value > inc.value {
                dec
            } else {
                inc
            }
        }
    })
}

fn optimize_geometric(a: &OptimizeArgs, from: usize, to: usize) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    let mut csv = String::from("K,value,ratio,orientation\n");
    for k in from..=to {
        let g = best_geometric(&a.pattern, k, a.orientation)?;
        if a.sweep.is_some() {
            eprintln!("K={k:<3} value={:.15} ratio={:.12}", g.value, g.ratio);
        }
        let orientation = report_name(&g.orientation);
        csv.push_str(&format!("{k},{},{},{orientation}\n", g.value, g.ratio));
        rows.push(json!({
            "K": k,
            "value": g.value,
            "ratio": g.ratio,
            "orientation": g.orientation,
            "lengths": g.lengths,
        }));
    }
    let result = json!({ "family": "geometric", "rows": rows });
    Ok(Outcome::json(result).csv((a.format == Format::Csv).then_some(csv)))
}

fn report_name(v: &impl serde::Serialize) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

pub fn exact(a: &ExactArgs) -> Result<Outcome, CliError> {
    let sigma = &a.pattern;
    if a.n < sigma.order() {
        return Err(CliError::Usage(format!("--n {} is below the pattern order {}", a.n, sigma.order())));
    }
    let total = binomial(a.n as u64, sigma.order() as u64);
    let result = if a.all_permutations {
        let (max, witnesses) = sigma_optimal_bruteforce(&realize(sigma), a.n)?;
        let layered: Vec<&Permutation> = witnesses.iter().filter(|w| w.is_layered()).collect();
        json!({
            "method": "all-permutations",
            "n": a.n,
            "max_count": max,
            "density": ExactDensity::new(max.clone(), total),
            "witness_count": witnesses.len(),
            "layered_witness_present": !layered.is_empty(),
            "layered_witnesses": layered,
            "witnesses": witnesses,
        })
    } else {
        let (method, res) = if a.pruned {
            ("pruned", best_layered_of_order_pruned(sigma, a.n)?)
        } else {
            ("compositions", best_layered_of_order(sigma, a.n)?)
        };
        json!({
            "method": method,
            "n": a.n,
            "best_shape": res.best_shape,
            "best_count": res.best_count,
            "density": ExactDensity::new(res.best_count.clone(), total),
            "ties": res.ties,
            "evaluated": res.evaluated,
        })
    };
    Ok(Outcome::json(result))
}

pub fn sample(a: &SampleArgs) -> Result<Outcome, CliError> {
    let result = match (&a.pattern, a.m) {
        (Some(pattern), _) => {
            if a.trials == 0 {
                return Err(CliError::Usage("--trials must be at least 1".into()));
            }
            let stats = estimate_density(pattern, &a.permuton, a.trials, a.seed)?;
            // Layered permutons only produce layered permutations.
            let exact = shape_of(pattern).map_or(0.0, |s| permuton_density(&s, &a.permuton).value);
            let z = if stats.std_error > 0.0 { Some((stats.estimate - exact) / stats.std_error) } else { None };
            let agrees = match z {
                Some(z) => z.abs() <= MC_SIGMAS,
                None => stats.estimate == exact,
            };
            json!({
                "pattern": pattern,
                "lengths": a.permuton,
                "stats": stats,
                "exact": exact,
                "z_score": z,
                "within_four_std_errors": agrees,
            })
        }
        (None, Some(m)) => {
            if m == 0 {
                return Err(CliError::Usage("--m must be at least 1".into()));
            }
            let draws = (0..a.count as u64)
                .map(|i| {
                    let p = sample_permutation(&a.permuton, m, a.seed.wrapping_add(i))?;
                    Ok(json!({ "seed": a.seed.wrapping_add(i), "shape": shape_of(&p), "permutation": p }))
                })
                .collect::<Result<Vec<_>, layerpack::Error>>()?;
            json!({ "lengths": a.permuton, "m": m, "samples": draws })
        }
        (None, None) => unreachable!("clap requires --m or --pattern"),
    };
    Ok(Outcome::json(result).seed(a.seed).tolerance("std_errors", MC_SIGMAS))
}

pub fn embed(a: &EmbedArgs) -> Result<Outcome, CliError> {
    let (shape, perm) = match (&a.permutation, &a.shape) {
        (Some(p), _) => {
            let perm = embed_permutation(p)?;
            (shape_of(p).expect("embedding succeeded on a layered permutation"), perm)
        }
        (None, Some(s)) => (s.clone(), embed_shape(s)),
        (None, None) => unreachable!("clap requires one host input"),
    };
    let condprob = match &a.pattern {
        Some(sigma) if sigma.order() > shape.order() => {
            return Err(CliError::Usage(format!(
                "pattern order {} exceeds host order {}",
                sigma.order(),
                shape.order()
            )))
        }
        Some(sigma) => Some(condprob_bound_check_shape(sigma, &shape)?),
        None => None,
    };
    let result = json!({
        "shape": shape,
        "lengths": perm,
        "segments": perm.support_segments(),
        "condprob": condprob,
    });
    let csv = (a.format == Format::Csv).then(|| perm.support_csv());
    Ok(Outcome::json(result).csv(csv))
}

/// `d'` and where it came from.
fn resolve_d_prime(tail: &LayeredShape, d_prime: Option<DPrime>) -> Result<(f64, String), CliError> {
    match d_prime {
        Some(DPrime::Value(v)) => Ok((v, "given".into())),
        Some(DPrime::Packing132) => {
            if tail.sizes() != [2] {
                return Err(CliError::Usage(format!(
                    "`132` supplies the density of (1,2) and needs tail 2, got tail {tail}"
                )));
            }
            Ok((packing_132(), "packing density of 132, 2*sqrt(3)-3".into()))
        }
        None => {
            let mut sizes = vec![1];
            sizes.extend_from_slice(tail.sizes());
            let sigma = LayeredShape::new(sizes)?;
            let g = best_geometric(&sigma, D_PRIME_LAYERS, OrientationArg::Best)?;
            Ok((
                g.value,
                format!("density attained by a geometric profile with K = {D_PRIME_LAYERS}, ratio {}", g.ratio),
            ))
        }
    }
}

pub fn bounds(action: &BoundsAction) -> Result<Outcome, CliError> {
    let result = match action {
        BoundsAction::Counterexample { n, tail, d_prime } => {
            let (d, source) = resolve_d_prime(tail, *d_prime)?;
            let analysis = counterexample_analysis(*n, tail, d)?;
            let chain = if tail.sizes() == [2] && *n >= 13 {
                let c = thirteen_chain(*n, d)?;
                Some(json!({ "holds": c.holds(), "chain": c }))
            } else {
                None
            };
            json!({ "d_prime": d, "d_prime_source": source, "analysis": analysis, "thirteen_chain": chain })
        }
        BoundsAction::FindN0 { tail, d_prime, horizon } => {
            let (d, source) = resolve_d_prime(tail, *d_prime)?;
            json!({ "d_prime": d, "d_prime_source": source, "search": find_n0(tail, d, *horizon)? })
        }
        BoundsAction::MergeConstants { pattern, big_c } => {
            let c = big_c.unwrap_or_else(|| bounded_layer_c(pattern));
            if !(c > 0.0 && c < 1.0) {
                return Err(CliError::Usage(format!("--C must lie in (0, 1), got {c}")));
            }
            let shape_hypothesis = merge_shape_hypothesis(pattern);
            json!({
                "C_source": if big_c.is_some() { "given" } else { "1/(2 m^3 k^(2m+1))" },
                "constants": merge_constants(pattern, c)?,
                "merge_shape_hypothesis": shape_hypothesis.is_ok(),
                "merge_shape_hypothesis_failure": shape_hypothesis.err(),
                "finite_layers_hypothesis": finite_layers_hypothesis(pattern),
            })
        }
        BoundsAction::Thresholds { pattern, epsilon, permuton } => {
            let eps = match (epsilon, permuton) {
                (Some(e), _) => *e,
                (None, Some(p)) => default_epsilon(pattern, p.lengths()).ok_or_else(|| {
                    CliError::Usage(format!(
                        "the permuton has {} layers; epsilon needs at least {}",
                        p.layer_count(),
                        (2 * pattern.layer_count()).saturating_sub(3).max(1)
                    ))
                })?,
                (None, None) => unreachable!("clap requires --epsilon or --permuton"),
            };
            json!({
                "thresholds": structure_thresholds(pattern, eps)?,
                "finite_layers_hypothesis": finite_layers_hypothesis(pattern),
            })
        }
    };
    Ok(Outcome::json(result))
}

pub fn verify(a: &VerifyArgs, no_timing: bool) -> Result<Outcome, CliError> {
    let selected: Vec<_> = if a.only.is_empty() {
        CRITERIA.iter().collect()
    } else {
        a.only
            .iter()
            .map(|key| {
                criterion(key.trim()).ok_or_else(|| {
                    let keys: Vec<_> = CRITERIA.iter().map(|c| c.key).collect();
                    CliError::Usage(format!("unknown criterion `{key}`; expected one of {}", keys.join(", ")))
                })
            })
            .collect::<Result<_, _>>()?
    };
    let options = VerifyOptions {
        horizon: a.horizon,
        trials: a.trials,
        mc_trials: a.mc_trials,
        seed: a.seed,
        restarts: a.restarts,
    };
    let mut records = Vec::new();
    let mut failed = Vec::new();
    for c in selected {
        eprintln!("criterion {} [{}] {} ...", c.id, c.key, c.title);
        let start = Instant::now();
        let outcome = c.run(&options);
        let elapsed = start.elapsed().as_secs_f64();
        let within_budget = elapsed < c.budget_secs as f64;
        let (holds, summary, checks) = match outcome {
            Ok(r) => (r.holds, r.summary, r.records),
            Err(e) => (false, format!("error: {e}"), Vec::new()),
        };
        let passed = holds && within_budget;
        eprintln!("criterion {} [{}] {} ({elapsed:.1}s)", c.id, c.key, if passed { "PASS" } else { "FAIL" });
        if !passed {
            failed.push(c.key);
        }
        records.push(json!({
            "id": c.id,
            "key": c.key,
            "title": c.title,
            "passed": passed,
            "holds": holds,
            "within_budget": within_budget,
            "budget_secs": c.budget_secs,
            "elapsed_secs": (!no_timing).then_some(elapsed),
            "summary": summary,
            "checks": checks,
        }));
    }
    let status = if failed.is_empty() { Status::Success } else { Status::VerificationFailed };
    let result = json!({
        "options": options,
        "criteria": records,
        "passed": records.len() - failed.len(),
        "failed": failed,
        "all_pass": failed.is_empty(),
    });
    Ok(Outcome::json(result).seed(a.seed).status(status))
}
