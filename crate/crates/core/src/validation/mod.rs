//! Machine checks that back the expert's review: static checks before execution,
//! trace invariants after it, and analytical or reference oracles.
//!
//! Every function here is pure and returns a [`ValidationReport`]; nothing panics on
//! malformed traces.

mod dynamic;
mod mm1;
mod report;

use serde::{Deserialize, Serialize};

use crate::codegen::{Artifact, SECTIONS};
use crate::engines;
use crate::ir::{validate_spec, SimulationSpec, SystemKind, ValidationOutcome};
use crate::run::RunResult;
use crate::script::builtins::{self, BuiltinClass};
use crate::script::{static_check, Diagnostic, Program};
use crate::stats;

pub use dynamic::{check_dynamic, LITTLE_MIN_DEPARTURES, LITTLE_TOLERANCE};
pub use mm1::{analytical_mm1, Mm1Error, Mm1Metrics};
pub use report::{Check, Status, ValidationReport};

/// Relative tolerance for distribution-level oracle comparison.
pub const DISTRIBUTION_TOLERANCE: f64 = 0.05;

pub fn check_static(artifact: &Artifact) -> ValidationReport {
    match artifact {
        Artifact::Spec(spec) => check_static_spec(spec),
        Artifact::Program { program, .. } => check_static_program(program),
    }
}

pub fn check_static_spec(spec: &SimulationSpec) -> ValidationReport {
    let check = match validate_spec(spec) {
        ValidationOutcome::Ok => Check::pass("spec.valid", "all field constraints hold"),
        ValidationOutcome::Violations(v) => {
            let parts: Vec<String> = v.iter().map(|v| v.to_string()).collect();
            Check::fail("spec.valid", parts.join("; "))
        }
    };
    ValidationReport::new(vec![check])
}

pub fn check_static_program(program: &Program) -> ValidationReport {
    let report = static_check(program);
    let of = |pick: fn(&Diagnostic) -> bool| -> Vec<String> {
        report.violations.iter().filter(|d| pick(d)).map(|d| d.to_string()).collect()
    };
    let mut checks = vec![
        Check::from_problems(
            "static.definite_assignment",
            "every variable assigned before use",
            &of(|d| matches!(d, Diagnostic::UseBeforeAssign { .. })),
        ),
        Check::from_problems(
            "static.calls",
            "every call names a builtin with the right arity",
            &of(|d| matches!(d, Diagnostic::UnknownFunction { .. } | Diagnostic::ArityMismatch { .. })),
        ),
    ];

    let warnings: Vec<String> = report.warnings.iter().map(|d| d.to_string()).collect();
    checks.push(if warnings.is_empty() {
        Check::pass("static.termination", "no while loop with a constant condition")
    } else {
        // The step budget bounds execution anyway; surface the lint without failing.
        Check::skip("static.termination", format!("lint: {}", warnings.join("; ")))
    });

    let (mut random, mut output, mut outside) = (0.0, 0.0, Vec::new());
    program.for_each_call(&mut |name, _, span| match builtins::lookup(name).map(|b| b.class) {
        Some(BuiltinClass::Random) => random += 1.0,
        Some(BuiltinClass::Output) => output += 1.0,
        Some(BuiltinClass::Pure) => {}
        None => outside.push(format!("{}:{}: {name} is not in the sandbox table", span.line, span.col)),
    });
    checks.push(
        Check::from_problems("static.sandbox_audit", "only sandbox builtins are reachable", &outside)
            .with("random_call_sites", random)
            .with("output_call_sites", output),
    );

    let names = program.section_names();
    let present: Vec<&str> = SECTIONS.iter().copied().filter(|s| names.contains(s)).collect();
    let ordered = names.iter().copied().filter(|n| SECTIONS.contains(n)).eq(present.iter().copied());
    checks.push(if present.len() == SECTIONS.len() && ordered {
        Check::pass("static.sections", SECTIONS.join(", "))
    } else {
        let missing: Vec<&str> = SECTIONS.iter().copied().filter(|s| !names.contains(s)).collect();
        let detail = if missing.is_empty() {
            format!("sections out of order: {}", names.join(", "))
        } else {
            format!("missing section(s): {}", missing.join(", "))
        };
        Check::fail("static.sections", detail)
    });
    ValidationReport::new(checks)
}

/// How closely a program is expected to follow the reference engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleContract {
    /// Same draws in the same order: series and events must be identical.
    Exact,
    /// Any correct model: summary statistics within [`DISTRIBUTION_TOLERANCE`].
    Distribution,
}

fn compared_keys(kind: SystemKind) -> &'static [&'static str] {
    match kind {
        SystemKind::Inventory => &["mean_on_hand", "total_demand", "fill_rate", "orders"],
        SystemKind::Queue => &["time_avg_in_system", "mean_wait", "mean_sojourn", "utilization"],
    }
}

/// Re-run the reference engine with `(spec, seed)` and compare `result` against it.
pub fn compare_to_oracle(
    result: &RunResult,
    spec: &SimulationSpec,
    seed: u64,
    contract: OracleContract,
) -> ValidationReport {
    let reference = match engines::run(spec, seed) {
        Ok(r) => r,
        Err(e) => return ValidationReport::new(vec![Check::fail("oracle.engine", e.to_string())]),
    };
    let mut checks = Vec::new();

    let mut counts = Vec::new();
    for (name, expected) in &reference.series {
        let found = result.series(name).map_or(0, <[_]>::len);
        let bad = match contract {
            OracleContract::Exact => found != expected.len(),
            OracleContract::Distribution => found == 0 && !expected.is_empty(),
        };
        if bad {
            counts.push(format!("{name}: expected {} points, found {found}", expected.len()));
        }
    }
    checks.push(
        Check::from_problems("oracle.point_count", "recorded series have the expected length", &counts)
            .with("points", result.point_count() as f64)
            .with("reference_points", reference.point_count() as f64),
    );

    let mut candidate = result.clone();
    candidate.series.retain(|name, _| spec.output.records(name));
    let identical = candidate.same_trace(&reference);
    checks.push(match (identical, contract) {
        (true, _) => Check::pass("oracle.exact_trace", "series and events identical to the reference run"),
        (false, OracleContract::Exact) => Check::fail("oracle.exact_trace", first_difference(&candidate, &reference)),
        (false, OracleContract::Distribution) => Check::skip(
            "oracle.exact_trace",
            format!("not identical (not required): {}", first_difference(&candidate, &reference)),
        ),
    });

    let ours = stats::summarize(spec.kind, &candidate);
    let theirs = stats::summarize(spec.kind, &reference);
    let mut problems = Vec::new();
    let mut dist = Check::pass("oracle.distribution", "");
    let mut compared = 0;
    for key in compared_keys(spec.kind) {
        let (Some(&a), Some(&b)) = (ours.get(*key), theirs.get(*key)) else { continue };
        compared += 1;
        let err = if a == b { 0.0 } else { (a - b).abs() / b.abs().max(f64::MIN_POSITIVE) };
        dist = dist.with(key, a).with(&format!("reference_{key}"), b);
        if !(err <= DISTRIBUTION_TOLERANCE) {
            problems.push(format!("{key}: {a} vs reference {b} ({:.1}% off)", err * 100.0));
        }
    }
    let dist = if compared == 0 {
        Check::skip("oracle.distribution", "no comparable summary statistics recorded")
    } else {
        let measured = dist.measured;
        Check { measured, ..Check::from_problems("oracle.distribution", &format!("{compared} summary statistics within 5%"), &problems) }
    };
    checks.push(dist);
    ValidationReport::new(checks)
}

fn first_difference(a: &RunResult, b: &RunResult) -> String {
    for (name, theirs) in &b.series {
        let Some(ours) = a.series(name) else { return format!("series {name} missing") };
        if let Some(i) = ours.iter().zip(theirs).position(|(p, q)| p != q) {
            return format!("{name}[{i}]: {:?} vs reference {:?}", ours[i], theirs[i]);
        }
        if ours.len() != theirs.len() {
            return format!("{name}: {} points vs reference {}", ours.len(), theirs.len());
        }
    }
    if let Some(name) = a.series.keys().find(|k| !b.series.contains_key(*k)) {
        return format!("extra series {name}");
    }
    match a.events.iter().zip(&b.events).position(|(p, q)| p != q) {
        Some(i) => format!("event {i}: {:?} vs reference {:?}", a.events[i], b.events[i]),
        None => format!("{} events vs reference {}", a.events.len(), b.events.len()),
    }
}
