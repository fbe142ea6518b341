#![allow(dead_code)]

use std::sync::Arc;
use std::time::Duration;

use simforge::{Store, Workflow};
use simforge_core::frontend::render;
use simforge_core::testkit::example_inventory;
use simforge_core::SimulationSpec;
use simforge_llm::mock::queue_fixture_spec;
use simforge_llm::{Backend, MockBackend, RetryPolicy};

/// The worked inventory example with every plot option switched on.
pub fn inventory_spec() -> SimulationSpec {
    let mut spec = example_inventory();
    spec.output.grid = true;
    spec.output.legend = true;
    spec.output.replenishment_markers = true;
    spec
}

pub fn inventory_description() -> String {
    render(&inventory_spec())
}

pub fn queue_description() -> String {
    render(&queue_fixture_spec())
}

/// Workflow over `dir` answering from `backend`, with retries that do not sleep.
pub fn workflow_with(dir: &std::path::Path, backend: Option<Arc<dyn Backend>>) -> Workflow {
    let wf = Workflow::new(Store::open(dir).unwrap())
        .with_retry(RetryPolicy { max_attempts: 3, base_delay: Duration::from_millis(1) }, Arc::new(|_| {}));
    match backend {
        Some(b) => wf.with_backend(b),
        None => wf,
    }
}

pub fn mock_workflow(dir: &std::path::Path) -> Workflow {
    workflow_with(dir, Some(Arc::new(MockBackend::new())))
}
