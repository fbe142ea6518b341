use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub status: Status,
    pub detail: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub measured: BTreeMap<String, f64>,
}

impl Check {
    pub fn new(id: &str, status: Status, detail: impl Into<String>) -> Self {
        Check { id: id.to_string(), status, detail: detail.into(), measured: BTreeMap::new() }
    }

    pub fn pass(id: &str, detail: impl Into<String>) -> Self {
        Self::new(id, Status::Pass, detail)
    }

    pub fn fail(id: &str, detail: impl Into<String>) -> Self {
        Self::new(id, Status::Fail, detail)
    }

    pub fn skip(id: &str, detail: impl Into<String>) -> Self {
        Self::new(id, Status::Skip, detail)
    }

    /// Pass when `problems` is empty, otherwise fail listing the first few.
    pub fn from_problems(id: &str, ok_detail: &str, problems: &[String]) -> Self {
        match problems {
            [] => Self::pass(id, ok_detail),
            [one] => Self::fail(id, one.clone()),
            [first, rest @ ..] => Self::fail(id, format!("{first} (and {} more)", rest.len())),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.measured.insert(key.to_string(), value);
        self
    }
}

/// Outcome of a set of checks. `overall` is [`Status::Pass`] iff no check failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub overall: Status,
}

impl ValidationReport {
    pub fn new(checks: Vec<Check>) -> Self {
        let overall = if checks.iter().any(|c| c.status == Status::Fail) { Status::Fail } else { Status::Pass };
        ValidationReport { checks, overall }
    }

    pub fn passed(&self) -> bool {
        self.overall == Status::Pass
    }

    pub fn get(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn status(&self, id: &str) -> Option<Status> {
        self.get(id).map(|c| c.status)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn merge(mut self, other: ValidationReport) -> Self {
        self.checks.extend(other.checks);
        Self::new(self.checks)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{:<4} {:<34} {}", c.status, c.id, c.detail)?;
        }
        write!(f, "overall: {}", self.overall)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_follows_checks() {
        let r = ValidationReport::new(vec![Check::pass("a", ""), Check::skip("b", "")]);
        assert!(r.passed());
        let r = r.merge(ValidationReport::new(vec![Check::fail("c", "no")]));
        assert_eq!(r.overall, Status::Fail);
        assert_eq!(r.failures().count(), 1);
        assert!(ValidationReport::new(vec![]).passed());
    }

    #[test]
    fn json_shape() {
        let r = ValidationReport::new(vec![Check::pass("x", "ok").with("l", 1.5)]);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["overall"], "pass");
        assert_eq!(v["checks"][0]["status"], "pass");
        assert_eq!(v["checks"][0]["measured"]["l"], 1.5);
        let back: ValidationReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
