//! Acceptance run: every criterion at full scale, one PASS/FAIL line each.
//! Exits nonzero when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use fracmax::error::Result;
use fracmax::experiments::{
    ahlfors_experiment, comparison_experiment, counterexample_blowup, domination_sweep, lipschitz_sweep, main_sweep, AhlforsConfig,
    ComparisonConfig, CounterexampleConfig, DominationConfig, LipschitzSweepConfig, MainSweepConfig,
};
use fracmax::report::{ExperimentReport, Gate};

struct Outcome {
    passed: bool,
    detail: String,
}

fn gate<'a>(gates: &'a [Gate], name: &str) -> &'a Gate {
    gates
        .iter()
        .find(|g| g.name == name)
        .unwrap_or_else(|| panic!("report has no gate '{name}'"))
}

/// Joins the named gates, plus a runtime budget when given.
fn from_gates(gates: &[Gate], names: &[(&str, &str)], took: Duration, budget: Option<Duration>) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (label, name) in names {
        let g = gate(gates, name);
        passed &= g.passed;
        parts.push(format!("{label} {} ({})", if g.passed { "ok" } else { "FAILED" }, g.detail));
    }
    match budget {
        Some(b) => {
            let fast = took <= b;
            passed &= fast;
            parts.push(format!("runtime {:.1}s of {:.0}s", took.as_secs_f64(), b.as_secs_f64()));
        }
        None => parts.push(format!("runtime {:.1}s", took.as_secs_f64())),
    }
    Outcome {
        passed,
        detail: parts.join("; "),
    }
}

fn all_gates(gates: &[Gate], took: Duration, budget: Option<Duration>) -> Outcome {
    let names: Vec<(&str, &str)> = gates.iter().map(|g| (g.name.as_str(), g.name.as_str())).collect();
    from_gates(gates, &names, took, budget)
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> (Result<T>, Duration) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed())
}

fn minutes(m: u64) -> Option<Duration> {
    Some(Duration::from_secs(60 * m))
}

fn criterion_1() -> Result<Outcome> {
    let (rep, took) = timed(|| counterexample_blowup(&CounterexampleConfig::default()));
    let rep = rep?;
    let gates = rep.gates();
    Ok(from_gates(
        &gates,
        &[
            ("(a)", "maximal_at_least_one_on_half_intervals"),
            ("(b)", "psi_growth_exponent"),
            ("(c)", "ratio_blowup"),
        ],
        took,
        minutes(5),
    ))
}

fn criterion_2() -> Result<Outcome> {
    let (rep, took) = timed(|| main_sweep(&MainSweepConfig::default()));
    Ok(all_gates(&rep?.gates(), took, minutes(10)))
}

fn criterion_3() -> Result<Outcome> {
    let (rep, took) = timed(|| lipschitz_sweep(&LipschitzSweepConfig::default()));
    Ok(all_gates(&rep?.gates(), took, None))
}

fn criterion_4() -> Result<Outcome> {
    let (rep, took) = timed(|| domination_sweep(&DominationConfig::default()));
    Ok(all_gates(&rep?.gates(), took, None))
}

fn criterion_5() -> Result<Outcome> {
    let (rep, took) = timed(|| ahlfors_experiment(&AhlforsConfig::default()));
    Ok(all_gates(&rep?.gates(), took, minutes(5)))
}

fn criterion_6() -> Result<Outcome> {
    let (rep, took) = timed(|| comparison_experiment(&ComparisonConfig::default()));
    Ok(all_gates(&rep?.gates(), took, None))
}

fn criterion_7() -> Result<Outcome> {
    let t = Instant::now();
    let results = common::suite(42, 16);
    let took = t.elapsed();
    let failed: Vec<String> = results
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    let budget = Duration::from_secs(120);
    let mut detail = format!("{} of {} suites hold", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        detail.push_str(&format!(" [{}]", failed.join("; ")));
    }
    detail.push_str(&format!("; runtime {:.1}s of 120s", took.as_secs_f64()));
    Ok(Outcome {
        passed: failed.is_empty() && took <= budget,
        detail,
    })
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 7] = [
        ("counterexample reproduction", criterion_1),
        ("main-theorem stability", criterion_2),
        ("Lipschitz scaling", criterion_3),
        ("pointwise domination", criterion_4),
        ("Ahlfors capacity scaling", criterion_5),
        ("capacity comparison", criterion_6),
        ("property suites", criterion_7),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!("{} criterion {id} ({name}): {detail}", if passed { "PASS" } else { "FAIL" });
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
