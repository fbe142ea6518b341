mod common;

use std::sync::Arc;

use common::*;
use simforge::pipeline::{CSV_FILE, RESULT_FILE, SVG_FILE};
use simforge::session::{ArtifactKind, Runner};
use simforge::{FrontendKind, Mode, NewSession, Session, State, WorkflowError};
use simforge_core::codegen::emit;
use simforge_core::validation::Status;
use simforge_core::RunResult;
use simforge_llm::mock::{PROSE, TRUNCATED_PROGRAM};
use simforge_llm::MockBackend;

fn gated_llm(desc: String) -> NewSession {
    NewSession::new(desc, Mode::Gated, FrontendKind::Llm)
}

#[test]
fn empty_description_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let wf = mock_workflow(dir.path());
    let e = wf.submit(gated_llm("   \n".into())).unwrap_err();
    assert_eq!(e, WorkflowError::EmptyDescription);
    assert!(wf.sessions().unwrap().is_empty());
}

#[test]
fn deterministic_frontend_generates_a_spec() {
    let dir = tempfile::tempdir().unwrap();
    let wf = mock_workflow(dir.path());
    let s = wf.submit(NewSession::new(inventory_description(), Mode::Gated, FrontendKind::Deterministic)).unwrap();
    assert_eq!(s.state, State::Described);
    assert_eq!(s.grammar_version, simforge_core::frontend::GRAMMAR_VERSION);
    let s = wf.generate(&s.id, None).unwrap();
    assert_eq!(s.state, State::Generated);
    assert!(s.prompts.is_empty());
    assert_eq!(s.artifact.as_ref().unwrap().kind, ArtifactKind::Spec);
    assert!(s.static_report().unwrap().passed());
    assert_eq!(s.ground_truth(), Some(inventory_spec()));
}

#[test]
fn gated_llm_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let wf = mock_workflow(dir.path());
    let s = wf.submit(gated_llm(inventory_description())).unwrap();
    let s = wf.generate(&s.id, None).unwrap();
    assert_eq!(s.state, State::Generated, "{:?}", s.failure);
    assert_eq!(s.prompts.len(), 1);
    assert!(s.prompts[0].prompt.contains("INVENTORY-A"));
    assert_eq!(s.artifact.as_ref().unwrap().kind, ArtifactKind::Program);
    // the stop sequence cut the trailing prose
    assert!(!s.completions[0].completion.contains("This program"));
    assert!(s.static_report().unwrap().passed());

    let e = wf.execute(&s.id, None).unwrap_err();
    assert!(matches!(e, WorkflowError::WrongState { state: State::Generated, .. }), "{e}");

    let s = wf.approve(&s.id, "ana", None).unwrap();
    assert_eq!(s.state, State::Approved);
    let s = wf.execute(&s.id, None).unwrap();
    assert_eq!(s.state, State::Executed);
    let run = s.latest_run().unwrap();
    assert_eq!((run.n, run.seed, run.runner, run.partial), (1, 0, Runner::Interpreter, false));

    let csv = String::from_utf8(wf.run_file(&s.id, 1, CSV_FILE).unwrap()).unwrap();
    assert!(csv.starts_with("series,x,y\n"));
    assert!(csv.contains("\non_hand,10,50\n"), "final on-hand 50 on day 10");
    let svg = String::from_utf8(wf.run_file(&s.id, 1, SVG_FILE).unwrap()).unwrap();
    assert_eq!(svg.matches("class=\"replenishment-marker\"").count(), 1);

    // gated: verify without sign-off attaches the report but does not finish
    let s = wf.verify(&s.id, None).unwrap();
    assert_eq!(s.state, State::Executed);
    let report = s.run_report(1).unwrap();
    assert!(report.passed(), "{report}");
    assert_eq!(report.status("oracle.exact_trace"), Some(Status::Pass));
    let s = wf.verify(&s.id, Some(("ana".into(), Some("plot matches the hand trace".into())))).unwrap();
    assert_eq!(s.state, State::Verified);
    assert_eq!(s.reports.iter().filter(|r| r.run == Some(1)).count(), 1, "report attached once");
    assert_eq!(s.sign_off.as_ref().unwrap().actor, "ana");
}

#[test]
fn queue_description_uses_the_example_template() {
    let dir = tempfile::tempdir().unwrap();
    let wf = mock_workflow(dir.path());
    let s = wf.submit(NewSession::new(queue_description(), Mode::SingleRuntime, FrontendKind::Llm)).unwrap();
    let s = wf.generate(&s.id, None).unwrap();
    assert_eq!(s.prompts[0].template_id, "queue-c");
    let s = wf.execute(&s.id, None).unwrap();
    let s = wf.verify(&s.id, None).unwrap();
    assert_eq!(s.state, State::Verified);
    assert!(s.sign_off.is_none());
    assert!(s.run_report(1).unwrap().passed(), "{}", s.run_report(1).unwrap());
}

#[test]
fn prose_completion_fails_unrecognized() {
    let dir = tempfile::tempdir().unwrap();
    let backend = MockBackend::new().route("INVENTORY-A", PROSE).unwrap();
    let wf = workflow_with(dir.path(), Some(Arc::new(backend)));
    let s = wf.submit(gated_llm(inventory_description())).unwrap();
    let s = wf.generate(&s.id, None).unwrap();
    assert_eq!(s.state, State::Failed);
    let f = s.failure.unwrap();
    assert_eq!((f.stage.as_str(), f.kind.as_str()), ("parse", "UnrecognizedArtifact"));
    assert_eq!(s.completions.len(), 1, "the bad completion is kept for review");
    // terminal
    assert!(matches!(wf.generate(&s.id, None), Err(WorkflowError::WrongState { .. })));
}

#[test]
fn truncated_program_fails_to_parse() {
    let dir = tempfile::tempdir().unwrap();
    let backend = MockBackend::new().route("INVENTORY-A", TRUNCATED_PROGRAM).unwrap();
    let wf = workflow_with(dir.path(), Some(Arc::new(backend)));
    let s = wf.submit(gated_llm(inventory_description())).unwrap();
    let s = wf.generate(&s.id, None).unwrap();
    assert_eq!(s.state, State::Failed);
    assert_eq!(s.failure.unwrap().kind, "Script");
}

#[test]
fn missing_backend_surfaces_at_generate() {
    let dir = tempfile::tempdir().unwrap();
    let wf = workflow_with(dir.path(), None);
    let s = wf.submit(gated_llm(inventory_description())).unwrap();
    assert_eq!(s.state, State::Described);
    let s = wf.generate(&s.id, None).unwrap();
    assert_eq!(s.state, State::Failed);
    assert_eq!(s.failure.unwrap().kind, "BackendUnavailable");
    assert_eq!(s.prompts.len(), 1, "prompt is stored before the call");
}

#[test]
fn reject_then_regenerate_keeps_history() {
    let dir = tempfile::tempdir().unwrap();
    let wf = mock_workflow(dir.path());
    let s = wf.submit(gated_llm(inventory_description())).unwrap();
    let s = wf.generate(&s.id, None).unwrap();
    assert_eq!(wf.reject(&s.id, "ana", None).unwrap_err(), WorkflowError::MissingReason);
    assert_eq!(wf.reject(&s.id, "ana", Some(" ".into())).unwrap_err(), WorkflowError::MissingReason);
    let s = wf.reject(&s.id, "ana", Some("lead time should be 3".into())).unwrap();
    assert_eq!(s.state, State::Rejected);
    assert!(matches!(wf.execute(&s.id, None), Err(WorkflowError::WrongState { state: State::Rejected, .. })));

    let edited = inventory_description().replace("after 2 days", "after 3 days");
    let s = wf.generate(&s.id, Some(edited.clone())).unwrap();
    assert_eq!(s.state, State::Generated);
    assert_eq!(s.prompts.len(), 2);
    assert_ne!(s.prompts[0].prompt, s.prompts[1].prompt);
    assert!(s.prompts[1].prompt.contains("after 3 days"));
    assert_eq!(s.descriptions.len(), 2);
    assert_eq!(s.description, edited);
    assert_eq!(s.approvals.len(), 1);
}

#[test]
fn single_runtime_has_no_approval_step() {
    let dir = tempfile::tempdir().unwrap();
    let wf = mock_workflow(dir.path());
    let s = wf.submit(NewSession::new(inventory_description(), Mode::SingleRuntime, FrontendKind::Deterministic)).unwrap();
    let s = wf.generate(&s.id, None).unwrap();
    assert!(matches!(wf.approve(&s.id, "ana", None), Err(WorkflowError::WrongState { .. })));
    let s = wf.execute(&s.id, None).unwrap();
    assert_eq!(s.latest_run().unwrap().runner, Runner::Engine);
    let s = wf.verify(&s.id, None).unwrap();
    assert_eq!(s.state, State::Verified);
    let r = s.run_report(1).unwrap();
    assert!(r.passed(), "{r}");
}

#[test]
fn verify_before_execute_is_wrong_state() {
    let dir = tempfile::tempdir().unwrap();
    let wf = mock_workflow(dir.path());
    let s = wf.submit(NewSession::new(inventory_description(), Mode::SingleRuntime, FrontendKind::Deterministic)).unwrap();
    assert!(matches!(wf.verify(&s.id, None), Err(WorkflowError::WrongState { state: State::Described, .. })));
    let s = wf.generate(&s.id, None).unwrap();
    assert!(matches!(wf.verify(&s.id, None), Err(WorkflowError::WrongState { state: State::Generated, .. })));
}

#[test]
fn step_budget_failure_keeps_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let wf = mock_workflow(dir.path()).with_limits(simforge_core::script::ExecLimits { max_steps: 20, max_series_points: 1_000_000 });
    let s = wf.submit(NewSession::new(inventory_description(), Mode::SingleRuntime, FrontendKind::Llm)).unwrap();
    let s = wf.generate(&s.id, None).unwrap();
    let s = wf.execute(&s.id, None).unwrap();
    assert_eq!(s.state, State::Failed);
    assert_eq!(s.failure.as_ref().unwrap().kind, "StepBudgetExceeded");
    let run = s.latest_run().unwrap();
    assert!(run.partial);
    let partial = wf.run_result(&s.id, run.n).unwrap();
    assert!(partial.point_count() > 0);
    assert!(partial.steps_used <= 20);
}

#[test]
fn seed_override_is_recorded_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let wf = mock_workflow(dir.path());
    let mut spec = queue_spec_small();
    spec.seed = 5;
    let desc = simforge_core::frontend::render(&spec);
    let mut csvs = Vec::new();
    for _ in 0..2 {
        let s = wf.submit(NewSession::new(desc.clone(), Mode::SingleRuntime, FrontendKind::Deterministic)).unwrap();
        wf.generate(&s.id, None).unwrap();
        let s = wf.execute(&s.id, Some(77)).unwrap();
        assert_eq!(s.latest_run().unwrap().seed, 77);
        let s = wf.verify(&s.id, None).unwrap();
        assert!(s.run_report(1).unwrap().passed(), "{}", s.run_report(1).unwrap());
        csvs.push(wf.run_file(&s.id, 1, CSV_FILE).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let direct = simforge_core::engines::run(&spec, 77).unwrap();
    assert_eq!(csvs[0], simforge::artifacts::to_csv(&direct).into_bytes());
}

fn queue_spec_small() -> simforge_core::SimulationSpec {
    simforge_core::testkit::mm1_queue(2.0, 1.0, simforge_core::ir::StopRule::Customers(300), 1)
}

#[test]
fn fabricated_bad_trace_fails_checks_but_sign_off_still_decides() {
    let dir = tempfile::tempdir().unwrap();
    let wf = mock_workflow(dir.path());
    let s = wf.submit(NewSession::new(inventory_description(), Mode::Gated, FrontendKind::Deterministic)).unwrap();
    wf.generate(&s.id, None).unwrap();
    wf.approve(&s.id, "ana", None).unwrap();
    let s = wf.execute(&s.id, None).unwrap();

    // tamper with the stored run: stock appears from nowhere on day 5
    let path = wf.store().run_dir(&s.id, 1).join(RESULT_FILE);
    let mut r: RunResult = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    r.series.get_mut("on_hand").unwrap()[5].1 += 40.0;
    std::fs::write(&path, serde_json::to_vec(&r).unwrap()).unwrap();

    let s = wf.verify(&s.id, None).unwrap();
    assert_eq!(s.state, State::Executed);
    let report = s.run_report(1).unwrap();
    assert!(!report.passed());
    assert_eq!(report.status("inventory.conservation"), Some(Status::Fail));
    assert_eq!(report.status("oracle.exact_trace"), Some(Status::Fail));
    assert_eq!(wf.verify(&s.id, Some(("".into(), None))).unwrap_err(), WorkflowError::InvalidInput { reason: "actor is required".into() });
    let s = wf.verify(&s.id, Some(("ana".into(), Some("accepted with known defect".into())))).unwrap();
    assert_eq!(s.state, State::Verified);
}

#[test]
fn replaying_the_log_reconstructs_the_session() {
    let dir = tempfile::tempdir().unwrap();
    let wf = mock_workflow(dir.path());
    let mut finals: Vec<Session> = Vec::new();

    let s = wf.submit(gated_llm(inventory_description())).unwrap();
    wf.generate(&s.id, None).unwrap();
    wf.reject(&s.id, "ana", Some("again".into())).unwrap();
    wf.generate(&s.id, Some(inventory_description().replace("10 days", "12 days"))).unwrap();
    wf.approve(&s.id, "ana", Some("ok".into())).unwrap();
    wf.execute(&s.id, Some(3)).unwrap();
    wf.verify(&s.id, None).unwrap();
    finals.push(wf.verify(&s.id, Some(("bo".into(), None))).unwrap());

    let s = wf.submit(NewSession::new("nonsense text here.", Mode::SingleRuntime, FrontendKind::Deterministic)).unwrap();
    finals.push(wf.generate(&s.id, None).unwrap());
    assert_eq!(finals[1].state, State::Failed);

    for f in &finals {
        let events = wf.store().events(&f.id).unwrap();
        assert_eq!(events.len() as u64, f.version);
        assert_eq!(&Session::replay(&events).unwrap(), f);
        // every prefix replays too
        for k in 1..=events.len() {
            Session::replay(&events[..k]).unwrap();
        }
    }
    // log lines are immutable: the first line never changes after later steps
    let first = std::fs::read_to_string(wf.store().log_path(&finals[0].id)).unwrap();
    assert!(first.lines().next().unwrap().contains("\"type\":\"created\""));
    assert_eq!(first.lines().count() as u64, finals[0].version);
}

#[test]
fn gated_store_never_has_unapproved_runs() {
    let dir = tempfile::tempdir().unwrap();
    let wf = mock_workflow(dir.path());
    for (i, desc) in [inventory_description(), queue_description()].into_iter().enumerate() {
        for mode in [Mode::Gated, Mode::SingleRuntime] {
            let s = wf.submit(NewSession::new(desc.clone(), mode, FrontendKind::Llm)).unwrap();
            wf.generate(&s.id, None).unwrap();
            // every execute attempt before approval must be refused in gated mode
            let attempt = wf.execute(&s.id, None);
            assert_eq!(attempt.is_ok(), mode == Mode::SingleRuntime);
            if mode == Mode::Gated && i == 0 {
                wf.approve(&s.id, "ana", None).unwrap();
                wf.execute(&s.id, None).unwrap();
            }
        }
    }
    assert_eq!(wf.audit_gated().unwrap(), Vec::<String>::new());

    // a run directory planted by hand is caught
    let s = wf.submit(gated_llm(inventory_description())).unwrap();
    wf.store().write_file(&wf.store().run_dir(&s.id, 1).join(CSV_FILE), b"series,x,y\n").unwrap();
    let bad = wf.audit_gated().unwrap();
    assert_eq!(bad.len(), 1);
    assert!(bad[0].starts_with(&s.id));
}

#[test]
fn concurrent_advances_are_serialized() {
    let dir = tempfile::tempdir().unwrap();
    let wf = Arc::new(mock_workflow(dir.path()));
    let s = wf.submit(NewSession::new(inventory_description(), Mode::Gated, FrontendKind::Deterministic)).unwrap();
    wf.generate(&s.id, None).unwrap();
    let handles: Vec<_> = (0..8)
        .map(|i| {
            let wf = wf.clone();
            let id = s.id.clone();
            std::thread::spawn(move || wf.approve(&id, &format!("actor{i}"), None).is_ok())
        })
        .collect();
    let wins = handles.into_iter().map(|h| h.join().unwrap()).filter(|ok| *ok).count();
    assert_eq!(wins, 1);
    let s = wf.session(&s.id).unwrap();
    assert_eq!(s.approvals.len(), 1);
    Session::replay(&wf.store().events(&s.id).unwrap()).unwrap();
}

#[test]
fn program_artifact_matches_direct_interpretation() {
    let dir = tempfile::tempdir().unwrap();
    let wf = mock_workflow(dir.path());
    let s = wf.submit(gated_llm(inventory_description())).unwrap();
    let s = wf.generate(&s.id, None).unwrap();
    let expected = emit(&simforge_core::testkit::example_inventory()).unwrap();
    assert_eq!(s.artifact.unwrap().text.trim_end(), expected.trim_end());
}
