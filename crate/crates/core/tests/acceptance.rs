//! Acceptance gate: every criterion at its stated tolerance and time budget.
//! Prints one line per criterion and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use layerpack::verify::{VerifyOptions, CRITERIA};

fn main() -> ExitCode {
    let options = VerifyOptions::default();
    let mut failed = Vec::new();
    for c in &CRITERIA {
        let start = Instant::now();
        let outcome = c.run(&options);
        let secs = start.elapsed().as_secs_f64();
        let (holds, detail) = match &outcome {
            Ok(rep) => {
                let bad: Vec<&str> = rep.records.iter().filter(|r| !r.holds).map(|r| r.name.as_str()).collect();
                let detail = if bad.is_empty() {
                    rep.summary.clone()
                } else {
                    format!("{}; failing: {}", rep.summary, bad.join(", "))
                };
                (rep.holds, detail)
            }
            Err(e) => (false, format!("error: {e}")),
        };
        let in_budget = secs < c.budget_secs as f64;
        let pass = holds && in_budget;
        println!(
            "{} criterion {:>2} [{}] {} ({:.1}s of {}s) {}",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.key,
            c.title,
            secs,
            c.budget_secs,
            detail
        );
        if !pass {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
