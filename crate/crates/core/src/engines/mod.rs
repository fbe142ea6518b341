//! Reference simulation kernels.
//!
//! These are the ground truth that generated programs are checked against, and the
//! direct execution path for spec artifacts.

mod inventory;
mod queue;

use thiserror::Error;

use crate::ir::{validate_spec, SimulationSpec, SystemKind, ValidationOutcome, Violation};
use crate::run::{PlotDecl, RunResult};
use crate::stats;

pub use inventory::{run_inventory, simulate_inventory, InventoryDayRecord, InventoryRun};
pub use queue::{run_queue, simulate_queue, QueueEvent, QueueEventKind, QueueRun};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid parameters: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

pub(crate) fn ensure_valid(spec: &SimulationSpec) -> Result<(), EngineError> {
    match validate_spec(spec) {
        ValidationOutcome::Ok => Ok(()),
        ValidationOutcome::Violations(v) => Err(EngineError::Invalid(v)),
    }
}

/// Run the reference engine for `spec`, keeping only the series the spec asks for.
pub fn run(spec: &SimulationSpec, seed: u64) -> Result<RunResult, EngineError> {
    ensure_valid(spec)?;
    let mut result = match spec.kind {
        SystemKind::Inventory => run_inventory(spec.inventory.as_ref().expect("validated"), seed)?,
        SystemKind::Queue => run_queue(spec.queue.as_ref().expect("validated"), seed)?,
    };
    result.series.retain(|name, _| spec.output.records(name));
    result.summary = stats::summarize(spec.kind, &result);
    result.plot = Some(PlotDecl {
        xlabel: spec.output.xlabel.clone(),
        ylabel: spec.output.ylabel.clone(),
        grid: spec.output.grid,
        legend: spec.output.legend,
    });
    Ok(result)
}
