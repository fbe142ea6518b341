//! Deterministic backend answering from a fixture table.
//!
//! A prompt is routed by the first marker substring it contains. The well-formed
//! fixtures are generated from the reference compiler so they always follow the
//! current trace contract; the adversarial ones exercise the rejection path.

use simforge_core::codegen::emit;
use simforge_core::ir::{serialize_canonical, StopRule};
use simforge_core::testkit::{example_inventory, mm1_queue};
use simforge_core::SimulationSpec;

use crate::client::{apply_stop_sequences, Backend, BackendKind, CompletionRequest, CompletionResponse, LlmError};

pub const INVENTORY_PROGRAM: &str = "inventory_program";
pub const INVENTORY_SPEC: &str = "inventory_spec";
pub const QUEUE_PROGRAM: &str = "queue_program";
pub const PROSE: &str = "prose";
pub const TRUNCATED_PROGRAM: &str = "truncated_program";
pub const QUEUE_REORDERED: &str = "queue_reordered";

pub const FIXTURE_NAMES: [&str; 6] =
    [INVENTORY_PROGRAM, INVENTORY_SPEC, QUEUE_PROGRAM, PROSE, TRUNCATED_PROGRAM, QUEUE_REORDERED];

/// The queue the bundled queue fixture simulates: exponential interarrival mean 2,
/// service mean 1, 1000 customers, seed 0.
pub fn queue_fixture_spec() -> SimulationSpec {
    mm1_queue(2.0, 1.0, StopRule::Customers(1000), 0)
}

/// Spec behind [`QUEUE_REORDERED`]: long enough for summary statistics to settle.
pub fn reordered_fixture_spec() -> SimulationSpec {
    mm1_queue(2.0, 1.0, StopRule::Customers(50_000), 17)
}

/// Spec behind [`INVENTORY_SPEC`]: the worked inventory example with the labels
/// `xlabel='time'`, `ylabel='inventory'`.
pub fn inventory_spec_fixture() -> SimulationSpec {
    let mut spec = example_inventory();
    spec.output.xlabel = "time".into();
    spec.output.ylabel = "inventory".into();
    spec
}

fn with_end(body: String) -> String {
    // Text after the end marker is what a model might ramble on with; stop sequences cut it.
    format!("{body}## end\n\nThis program simulates the system.\n")
}

/// The queue program with the two draws made on an arrival swapped: the service time is
/// drawn before the next interarrival time. Statistically the same model, different trace.
fn reorder_arrival_draws(source: &str) -> String {
    let lines: Vec<&str> = source.lines().collect();
    let start = lines.iter().position(|l| l.trim() == "if arrivals >= customer_limit:").expect("arrival branch");
    let busy = lines[start..].iter().position(|l| l.trim() == "if server_busy == 0:").expect("service start") + start;
    let indent = lines[busy].len() - lines[busy].trim_start().len();
    let end = lines[busy + 1..]
        .iter()
        .position(|l| l.len() - l.trim_start().len() <= indent)
        .map_or(lines.len(), |p| p + busy + 1);
    let mut out: Vec<&str> = lines[..start].to_vec();
    out.extend(&lines[busy..end]);
    out.extend(&lines[start..busy]);
    out.extend(&lines[end..]);
    out.join("\n") + "\n"
}

pub fn fixture(name: &str) -> Option<String> {
    let text = match name {
        INVENTORY_PROGRAM => with_end(emit(&example_inventory()).expect("valid")),
        INVENTORY_SPEC => with_end(serialize_canonical(&inventory_spec_fixture()).expect("valid")),
        QUEUE_PROGRAM => with_end(emit(&queue_fixture_spec()).expect("valid")),
        QUEUE_REORDERED => with_end(reorder_arrival_draws(&emit(&reordered_fixture_spec()).expect("valid"))),
        PROSE => "Sure! Here is a Python simulation of the inventory system you described.\n\n\
                  import random\nimport matplotlib.pyplot as plt\n\ninventory = 100\n"
            .to_string(),
        TRUNCATED_PROGRAM => {
            // Cut right after the loop header, as when a completion runs out of tokens.
            let full = emit(&example_inventory()).expect("valid");
            let cut = full.find("for day in range").expect("day loop");
            let line_end = full[cut..].find('\n').map_or(full.len(), |i| cut + i + 1);
            full[..line_end].to_string()
        }
        _ => return None,
    };
    Some(text)
}

#[derive(Debug, Clone)]
pub struct MockBackend {
    /// (marker, completion text), checked in order.
    routes: Vec<(String, String)>,
}

impl Default for MockBackend {
    fn default() -> Self {
        let routes = [("INVENTORY-A", INVENTORY_PROGRAM), ("INVENTORY-B", INVENTORY_SPEC), ("QUEUE-C", QUEUE_PROGRAM)]
            .into_iter()
            .map(|(m, f)| (m.to_string(), fixture(f).expect("bundled fixture")))
            .collect();
        MockBackend { routes }
    }
}

impl MockBackend {
    pub fn new() -> Self {
        Self::default()
    }

    /// Answer prompts containing `marker` with the named fixture, ahead of existing routes.
    pub fn route(self, marker: &str, fixture_name: &str) -> Result<Self, LlmError> {
        let text = fixture(fixture_name)
            .ok_or_else(|| LlmError::BackendUnavailable { reason: format!("no mock fixture named {fixture_name}") })?;
        Ok(self.route_text(marker, text))
    }

    pub fn route_text(mut self, marker: &str, completion: impl Into<String>) -> Self {
        self.routes.insert(0, (marker.to_string(), completion.into()));
        self
    }
}

impl Backend for MockBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Mock
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        let (_, text) = self
            .routes
            .iter()
            .find(|(marker, _)| request.prompt.contains(marker.as_str()))
            .ok_or_else(|| LlmError::BackendUnavailable { reason: "no mock fixture matches the prompt".into() })?;
        Ok(CompletionResponse {
            completion: apply_stop_sequences(text, &request.params.stop_sequences),
            backend: BackendKind::Mock,
            latency_ms: 0,
            reported_tokens: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::promptkit::{build_prompt, Approach, GenerationParams};
    use simforge_core::codegen::{parse_llm_output, Artifact, ArtifactError};

    fn ask(mock: &MockBackend, approach: Approach) -> String {
        let prompt = build_prompt(approach, "A system.", &[]).unwrap();
        mock.complete(&CompletionRequest::new(prompt, GenerationParams::default()).unwrap()).unwrap().completion
    }

    #[test]
    fn routes_by_template_marker() {
        let mock = MockBackend::new();
        assert!(matches!(parse_llm_output(&ask(&mock, Approach::Detailed)), Ok(Artifact::Program { .. })));
        assert_eq!(parse_llm_output(&ask(&mock, Approach::MinimalWithBindings)), Ok(Artifact::Spec(inventory_spec_fixture())));
        assert!(matches!(parse_llm_output(&ask(&mock, Approach::DetailedWithExample)), Ok(Artifact::Program { .. })));
    }

    #[test]
    fn stop_sequence_applied() {
        let text = ask(&MockBackend::new(), Approach::Detailed);
        assert!(!text.contains("## end"));
        assert!(!text.contains("This program"));
    }

    #[test]
    fn adversarial_fixtures_rejected() {
        let mock = MockBackend::new().route("INVENTORY-A", PROSE).unwrap();
        assert!(matches!(parse_llm_output(&ask(&mock, Approach::Detailed)), Err(ArtifactError::UnrecognizedArtifact { .. })));
        let mock = MockBackend::new().route("INVENTORY-A", TRUNCATED_PROGRAM).unwrap();
        assert!(matches!(parse_llm_output(&ask(&mock, Approach::Detailed)), Err(ArtifactError::Script(_))));
    }

    #[test]
    fn every_fixture_exists() {
        for name in FIXTURE_NAMES {
            assert!(fixture(name).is_some(), "{name}");
        }
        assert!(MockBackend::new().route("X", "nope").is_err());
    }

    #[test]
    fn unmatched_prompt() {
        let req = CompletionRequest::new("hello", GenerationParams::default()).unwrap();
        assert!(matches!(MockBackend::new().complete(&req), Err(LlmError::BackendUnavailable { .. })));
    }

    #[test]
    fn reordering_swaps_blocks() {
        let src = emit(&reordered_fixture_spec()).unwrap();
        let reordered = reorder_arrival_draws(&src);
        assert_ne!(src, reordered);
        let mut a: Vec<&str> = src.lines().collect();
        let mut b: Vec<&str> = reordered.lines().collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        let arrival = reordered.find("if arrivals >= customer_limit:").unwrap();
        let busy = reordered.find("if server_busy == 0:").unwrap();
        assert!(busy < arrival);
    }
}
