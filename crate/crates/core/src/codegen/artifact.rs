//! Recognise what an LLM completion contains.

use thiserror::Error;

use crate::ir::{parse_canonical, CanonicalError, SimulationSpec, SPEC_SENTINEL};
use crate::script::{parse_source, ParseError, Program, SCRIPT_SENTINEL};

/// Marker a completion may end with; it and everything after it is dropped.
pub const END_MARKER: &str = "## end";

#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Spec(SimulationSpec),
    Program { program: Program, source: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArtifactError {
    #[error("unrecognized artifact: line {line}: {text:?}")]
    UnrecognizedArtifact { line: usize, text: String },
    #[error("spec completion: {0}")]
    Spec(#[from] CanonicalError),
    #[error("script completion: {0}")]
    Script(#[from] ParseError),
}

/// Strip everything from the end marker on.
fn body(completion: &str) -> &str {
    match completion.lines().position(|l| l.trim() == END_MARKER) {
        Some(idx) => {
            let offset: usize = completion.split_inclusive('\n').take(idx).map(str::len).sum();
            &completion[..offset]
        }
        None => completion,
    }
}

/// Parse a completion by its sentinel first line: `## simspec v1` for canonical spec
/// text, `## simscript v1` for SimScript. Leading blank lines are skipped.
pub fn parse_llm_output(completion: &str) -> Result<Artifact, ArtifactError> {
    let text = body(completion);
    let first = text
        .lines()
        .enumerate()
        .find(|(_, l)| !l.trim().is_empty());
    match first {
        Some((_, l)) if l.trim() == SPEC_SENTINEL => Ok(Artifact::Spec(parse_canonical(text)?)),
        Some((_, l)) if l.trim() == SCRIPT_SENTINEL => Ok(Artifact::Program {
            program: parse_source(text)?,
            source: text.to_string(),
        }),
        Some((idx, l)) => Err(ArtifactError::UnrecognizedArtifact { line: idx + 1, text: l.to_string() }),
        None => Err(ArtifactError::UnrecognizedArtifact { line: 1, text: String::new() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::serialize_canonical;

    #[test]
    fn prose_is_rejected_with_first_line() {
        let err = parse_llm_output("Sure! Here is a simulation in Python:\nimport random\n").unwrap_err();
        assert_eq!(
            err,
            ArtifactError::UnrecognizedArtifact { line: 1, text: "Sure! Here is a simulation in Python:".into() }
        );
    }

    #[test]
    fn script_sentinel() {
        let a = parse_llm_output("## simscript v1\nx = 1\nrecord('x', 0, x)\n## end\ntrailing prose\n").unwrap();
        let Artifact::Program { program, source } = a else { panic!() };
        assert_eq!(program.body.len(), 2);
        assert!(!source.contains("trailing"));
    }

    #[test]
    fn spec_sentinel() {
        let spec = crate::ir::tests::worked_inventory();
        let text = format!("\n{}{END_MARKER}\n", serialize_canonical(&spec).unwrap());
        assert_eq!(parse_llm_output(&text).unwrap(), Artifact::Spec(spec));
    }

    #[test]
    fn truncated_script_reports_parse_error() {
        let err = parse_llm_output("## simscript v1\nwhile x <").unwrap_err();
        assert!(matches!(err, ArtifactError::Script(_)));
    }
}
