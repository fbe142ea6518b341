//! Acceptance run: one line per criterion, non-zero exit if any fails.
//!
//! Expected values for the inventory and queue criteria are computed here, by hand or
//! from closed forms, and never taken from the code under test.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simforge::pipeline::{CSV_FILE, SVG_FILE};
use simforge::{FrontendKind, Mode, NewSession, State, Workflow, WorkflowError};
use simforge_core::codegen::emit;
use simforge_core::engines;
use simforge_core::ir::{parse_canonical, serialize_canonical, Discipline, DistributionSpec, QueueParams, StopRule};
use simforge_core::script::{interpret, parse_source, ExecLimits};
use simforge_core::testkit::{example_inventory, mm1_queue, random_specs};
use simforge_core::validation::{check_dynamic, check_static, Status};
use simforge_core::{RunResult, SimulationSpec, SystemKind};
use simforge_llm::mock::PROSE;
use simforge_llm::{check_budget, GenerationParams, MockBackend, TOKEN_WINDOW};

type Outcome = Result<String, String>;

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = f()?;
    let took = start.elapsed();
    match limit {
        Some(l) if took > l => Err(format!("{out}; took {took:.2?}, limit {l:?}")),
        _ => Ok(format!("{out} in {took:.2?}")),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_round_trip() -> Outcome {
    timed(Some(Duration::from_secs(10)), || {
        let specs = random_specs(0xC1, 1000);
        for (i, s) in specs.iter().enumerate() {
            let text = serialize_canonical(s).map_err(|e| format!("spec {i}: {e}"))?;
            let back = parse_canonical(&text).map_err(|e| format!("spec {i}: {e}"))?;
            ensure(&back == s, || format!("spec {i} changed in the round trip"))?;
        }
        Ok("1000 specs round-trip".into())
    })
}

fn c2_equivalence() -> Outcome {
    timed(Some(Duration::from_secs(60)), || {
        let specs = random_specs(0xC2, 240);
        let kinds = |k| specs.iter().filter(|s| s.kind == k).count();
        ensure(kinds(SystemKind::Inventory) >= 50 && kinds(SystemKind::Queue) >= 50, || "unbalanced kinds".into())?;
        for (i, s) in specs.iter().enumerate() {
            let program = parse_source(&emit(s).map_err(|e| e.to_string())?).map_err(|e| format!("pair {i}: {e}"))?;
            let ours = interpret(&program, s.seed, ExecLimits::default()).map_err(|e| format!("pair {i}: {e}"))?;
            let theirs = engines::run(s, s.seed).map_err(|e| format!("pair {i}: {e}"))?;
            ensure(ours.same_trace(&theirs), || format!("pair {i} diverges: {s:?}"))?;
        }
        Ok(format!(
            "{} pairs identical ({} inventory, {} queue)",
            specs.len(),
            kinds(SystemKind::Inventory),
            kinds(SystemKind::Queue)
        ))
    })
}

fn c3_inventory_invariants() -> Outcome {
    timed(None, || {
        let mut runs = 0;
        for (i, mut s) in random_specs(0xC3, 1200).into_iter().filter(|s| s.kind == SystemKind::Inventory).enumerate() {
            // record everything so no check is skipped for want of a series
            s.output.series = SystemKind::Inventory.known_series().iter().map(|x| x.to_string()).collect();
            let r = engines::run(&s, s.seed).map_err(|e| format!("run {i}: {e}"))?;
            let report = check_dynamic(&r, &s);
            for id in ["inventory.conservation", "inventory.order_timing", "inventory.non_negative"] {
                ensure(report.status(id) == Some(Status::Pass), || format!("run {i}: {id}\n{report}"))?;
            }
            runs += 1;
        }
        ensure(runs >= 500, || format!("only {runs} inventory runs"))?;
        Ok(format!("{runs} fuzzed runs, conservation and order timing hold"))
    })
}

fn c4_inventory_oracle() -> Outcome {
    // Hand trace, worked before the engine existed. Each day: demand 10, receive what is
    // due, ship, then reorder at end of day if stock <= 30 and nothing is on order.
    //   day 0..7: 100 90 80 70 60 50 40 30   end of day 7: 30 <= 30, order 50 (due day 9)
    //   day 8: 20   day 9: 20 + 50 - 10 = 60   day 10: 50
    let hand: [f64; 11] = [100.0, 90.0, 80.0, 70.0, 60.0, 50.0, 40.0, 30.0, 20.0, 60.0, 50.0];
    let spec = example_inventory();
    let check = |r: &RunResult, who: &str| -> Result<(), String> {
        let on_hand: Vec<f64> = r.series("on_hand").unwrap_or_default().iter().map(|p| p.1).collect();
        ensure(on_hand == hand, || format!("{who} on_hand {on_hand:?}"))?;
        let orders: Vec<f64> = r.events_named("order").collect();
        let receipts: Vec<f64> = r.events_named("replenishment").collect();
        ensure(orders == [7.0] && receipts == [9.0], || format!("{who} orders {orders:?} receipts {receipts:?}"))
    };
    let engine = engines::run(&spec, 0).map_err(|e| e.to_string())?;
    check(&engine, "engine")?;
    let program = parse_source(&emit(&spec).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    check(&interpret(&program, 0, ExecLimits::default()).map_err(|e| e.to_string())?, "generated program")?;
    Ok("order day 7, receipt day 9, final on-hand 50 (engine and generated program)".into())
}

/// Time average of a step function sampled at its change points, over [first x, last x].
fn step_average(points: &[(f64, f64)]) -> f64 {
    let area: f64 = points.windows(2).map(|w| w[0].1 * (w[1].0 - w[0].0)).sum();
    area / (points[points.len() - 1].0 - points[0].0)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    s / n as f64
}

fn c5_mm1_oracle() -> Outcome {
    timed(Some(Duration::from_secs(60)), || {
        // M/M/1 with lambda = 1/2, mu = 1: rho = 1/2, L = rho/(1-rho) = 1, W = 1/(mu-lambda) = 2
        let (lambda, mu) = (0.5f64, 1.0f64);
        let rho = lambda / mu;
        let (l_exact, w_exact) = (rho / (1.0 - rho), 1.0 / (mu - lambda));
        let spec = mm1_queue(2.0, 1.0, StopRule::Customers(200_000), 20_240_501);
        let r = engines::run(&spec, spec.seed).map_err(|e| e.to_string())?;
        let size = r.series("system_size").ok_or("no system_size")?;
        let sojourn = r.series("sojourn").ok_or("no sojourn")?;
        ensure(sojourn.len() >= 200_000, || format!("{} customers", sojourn.len()))?;
        let l = step_average(size);
        let w = mean(sojourn.iter().map(|p| p.1));
        let (el, ew) = ((l - l_exact).abs() / l_exact, (w - w_exact).abs() / w_exact);
        let msg = format!("L {l:.4} ({:.2}% off 1.0), W {w:.4} ({:.2}% off 2.0)", el * 100.0, ew * 100.0);
        ensure(el <= 0.05 && ew <= 0.05, || msg.clone())?;
        Ok(msg)
    })
}

fn duration_dist(rng: &mut ChaCha8Rng, mean: f64) -> DistributionSpec {
    match rng.random_range(0..3) {
        0 => DistributionSpec::exponential(mean),
        1 => DistributionSpec::uniform_real(0.0, 2.0 * mean),
        _ => {
            let half = rng.random_range(0.0..mean);
            DistributionSpec::uniform_real(mean - half, mean + half)
        }
    }
}

fn c6_littles_law() -> Outcome {
    timed(None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC6);
        let mut worst: f64 = 0.0;
        for i in 0..20 {
            let ia_mean = rng.random_range(0.5..5.0);
            let rho = rng.random_range(0.2..0.9);
            let spec = SimulationSpec::queue(
                QueueParams {
                    interarrival: duration_dist(&mut rng, ia_mean),
                    service: duration_dist(&mut rng, rho * ia_mean),
                    servers: 1,
                    discipline: Discipline::Fifo,
                    stop: StopRule::Customers(rng.random_range(10_000..=30_000)),
                },
                rng.random(),
            );
            let r = engines::run(&spec, spec.seed).map_err(|e| e.to_string())?;
            let size = r.series("system_size").ok_or("no system_size")?;
            let sojourn = r.series("sojourn").ok_or("no sojourn")?;
            ensure(sojourn.len() >= 10_000, || format!("config {i}: {} departures", sojourn.len()))?;
            let elapsed = size[size.len() - 1].0;
            let l = step_average(size);
            let lambda_eff = sojourn.len() as f64 / elapsed;
            let w = mean(sojourn.iter().map(|p| p.1));
            let err = (l - lambda_eff * w).abs() / l;
            worst = worst.max(err);
            ensure(err <= 0.05, || format!("config {i}: L {l} vs lambda W {}", lambda_eff * w))?;
            let report = check_dynamic(&r, &spec);
            ensure(report.status("queue.littles_law") == Some(Status::Pass), || format!("config {i}:\n{report}"))?;
        }
        Ok(format!("20 configs, worst |L - lambda W| / L = {worst:.2e}"))
    })
}

fn mock_workflow(dir: &std::path::Path, backend: MockBackend) -> Workflow {
    common::workflow_with(dir, Some(Arc::new(backend)))
}

/// Gated LLM session on the mock backend taken to a signed-off verification.
fn gated_run(wf: &Workflow, description: String, seed: Option<u64>) -> Result<simforge::Session, String> {
    let e = |e: WorkflowError| e.to_string();
    let s = wf.submit(NewSession::new(description, Mode::Gated, FrontendKind::Llm)).map_err(e)?;
    let s = wf.generate(&s.id, None).map_err(e)?;
    ensure(s.state == State::Generated, || format!("generate: {:?}", s.failure))?;
    wf.approve(&s.id, "acceptance", Some("reviewed".into())).map_err(e)?;
    let s = wf.execute(&s.id, seed).map_err(e)?;
    ensure(s.state == State::Executed, || format!("execute: {:?}", s.failure))?;
    wf.verify(&s.id, Some(("acceptance".into(), None))).map_err(e)
}

fn c7_gated_pipeline() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let wf = mock_workflow(dir.path(), MockBackend::new());
    let e = |e: WorkflowError| e.to_string();

    let s = wf.submit(NewSession::new(common::inventory_description(), Mode::Gated, FrontendKind::Llm)).map_err(e)?;
    let s = wf.generate(&s.id, None).map_err(e)?;
    ensure(!s.prompts.is_empty() && !s.completions.is_empty(), || "no prompt or completion stored".into())?;
    let artifact = simforge_core::codegen::parse_llm_output(&s.artifact.as_ref().ok_or("no artifact")?.text)
        .map_err(|e| e.to_string())?;
    ensure(check_static(&artifact).passed() && s.static_report().is_some_and(|r| r.passed()), || "static checks".into())?;
    match wf.execute(&s.id, None) {
        Err(WorkflowError::WrongState { state: State::Generated, .. }) => {}
        other => return Err(format!("execute before approval gave {other:?}")),
    }
    wf.approve(&s.id, "acceptance", None).map_err(e)?;
    let s = wf.execute(&s.id, None).map_err(e)?;
    ensure(s.state == State::Executed, || format!("execute: {:?}", s.failure))?;
    let s = wf.verify(&s.id, Some(("acceptance".into(), None))).map_err(e)?;
    let report = s.run_report(1).ok_or("no dynamic report")?;
    ensure(s.state == State::Verified && report.passed(), || format!("verify:\n{report}"))?;
    let csv = wf.run_file(&s.id, 1, CSV_FILE).map_err(e)?;
    let svg = String::from_utf8(wf.run_file(&s.id, 1, SVG_FILE).map_err(e)?).map_err(|e| e.to_string())?;
    ensure(csv.starts_with(b"series,x,y\n") && svg.contains("replenishment-marker"), || "csv/svg".into())?;
    ensure(wf.audit_gated().map_err(e)?.is_empty(), || "gated audit".into())?;

    let prose = mock_workflow(dir.path(), MockBackend::new().route("INVENTORY-A", PROSE).map_err(|e| e.to_string())?);
    let s = prose
        .submit(NewSession::new(common::inventory_description(), Mode::Gated, FrontendKind::Llm))
        .map_err(e)?;
    let s = prose.generate(&s.id, None).map_err(e)?;
    let kind = s.failure.as_ref().map(|f| f.kind.as_str());
    ensure(s.state == State::Failed && kind == Some("UnrecognizedArtifact"), || format!("prose gave {:?}", s.failure))?;
    Ok("prompt, completion, static pass, approval, run, dynamic pass, csv and svg; early execute WrongState; prose Failed(UnrecognizedArtifact)".into())
}

fn c8_reproducible() -> Outcome {
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let wf = mock_workflow(dir.path(), MockBackend::new());
        let mut files = Vec::new();
        for (desc, seed) in [(common::inventory_description(), None), (common::queue_description(), Some(99))] {
            let s = gated_run(&wf, desc, seed)?;
            files.push(wf.run_file(&s.id, 1, CSV_FILE).map_err(|e| e.to_string())?);
        }
        outputs.push(files);
    }
    ensure(outputs[0] == outputs[1], || "CSV bytes differ between runs".into())?;
    let bytes: usize = outputs[0].iter().map(Vec::len).sum();
    Ok(format!("inventory and queue CSVs byte-identical across two pipelines ({bytes} bytes)"))
}

fn c9_budget() -> Outcome {
    let params = GenerationParams::default();
    let fits = "x".repeat((TOKEN_WINDOW - params.max_tokens) * 4);
    let over = format!("{fits}x");
    ensure(check_budget(&fits, &params).is_ok(), || "prompt + max_tokens = 4096 rejected".into())?;
    match check_budget(&over, &params) {
        Err(b) if b.overshoot == 1 => Ok("4096 tokens accepted, 4097 rejected".into()),
        other => Err(format!("4097 tokens gave {other:?}")),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("IR round-trip", c1_round_trip),
        ("codegen-engine equivalence", c2_equivalence),
        ("inventory conservation and order timing", c3_inventory_invariants),
        ("deterministic inventory oracle", c4_inventory_oracle),
        ("M/M/1 queueing oracle", c5_mm1_oracle),
        ("Little's law", c6_littles_law),
        ("end-to-end gated pipeline", c7_gated_pipeline),
        ("reproducible CSV", c8_reproducible),
        ("token budget boundary", c9_budget),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
