//! Canonical line-oriented text form of a [`SimulationSpec`].
//!
//! The layout is documented in `docs/canonical-spec.md`. In short: UTF-8, LF endings,
//! `#` lines are comments, one `key: value` per line, keys in a fixed order with one
//! level of dotted nesting. Reals are written in shortest round-trip form, strings as
//! JSON string literals.

use std::collections::HashMap;
use std::fmt::Write;

use thiserror::Error;

use super::{
    validate_spec, Discipline, DistributionKind, DistributionSpec, InventoryParams, OutputSpec,
    QueueParams, SimulationSpec, StopRule, SystemKind, ValidationOutcome, Violation,
};

/// First line of every serialized spec.
pub const SPEC_SENTINEL: &str = "## simspec v1";

const COMMON_KEYS: [&str; 8] = [
    "kind",
    "seed",
    "output.series",
    "output.xlabel",
    "output.ylabel",
    "output.grid",
    "output.legend",
    "output.replenishment_markers",
];
const INVENTORY_KEYS: [&str; 7] = [
    "initial_inventory",
    "reorder_point",
    "order_quantity",
    "lead_time",
    "horizon",
    "demand.kind",
    "demand.params",
];
const QUEUE_KEYS: [&str; 8] = [
    "interarrival.kind",
    "interarrival.params",
    "service.kind",
    "service.params",
    "servers",
    "discipline",
    "stop.kind",
    "stop.limit",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CanonicalError {
    #[error("missing field {0:?}")]
    MissingField(String),
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: {key} expects {expected}, got {found:?}")]
    TypeMismatch { key: String, line: usize, expected: &'static str, found: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { key: String, line: usize },
    #[error("line {line}: expected `key: value`")]
    Malformed { line: usize },
    #[error("invalid spec: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

impl CanonicalError {
    pub fn line(&self) -> Option<usize> {
        match self {
            CanonicalError::UnknownKey { line, .. }
            | CanonicalError::TypeMismatch { line, .. }
            | CanonicalError::DuplicateKey { line, .. }
            | CanonicalError::Malformed { line } => Some(*line),
            CanonicalError::MissingField(_) | CanonicalError::Invalid(_) => None,
        }
    }
}

fn real(v: f64) -> String {
    // -0.0 and 0.0 are the same spec value.
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:?}")
}

fn quoted(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn params(p: &[f64]) -> String {
    p.iter().map(|v| real(*v)).collect::<Vec<_>>().join(", ")
}

/// Serialize a valid spec. Invalid specs are rejected with their violations.
pub fn serialize_canonical(spec: &SimulationSpec) -> Result<String, CanonicalError> {
    if let ValidationOutcome::Violations(v) = validate_spec(spec) {
        return Err(CanonicalError::Invalid(v));
    }
    let mut out = String::new();
    let mut line = |k: &str, v: &str| {
        let _ = writeln!(out, "{k}: {v}");
    };
    // The sentinel is itself a comment line.
    let mut text = format!("{SPEC_SENTINEL}\n");
    line("kind", spec.kind.as_str());
    line("seed", &spec.seed.to_string());
    match spec.kind {
        SystemKind::Inventory => {
            let inv = spec.inventory.as_ref().expect("validated");
            line("initial_inventory", &inv.initial_inventory.to_string());
            line("reorder_point", &inv.reorder_point.to_string());
            line("order_quantity", &inv.order_quantity.to_string());
            line("lead_time", &inv.lead_time.to_string());
            line("horizon", &inv.horizon.to_string());
            line("demand.kind", inv.demand.kind.as_str());
            line("demand.params", &params(&inv.demand.params));
        }
        SystemKind::Queue => {
            let q = spec.queue.as_ref().expect("validated");
            line("interarrival.kind", q.interarrival.kind.as_str());
            line("interarrival.params", &params(&q.interarrival.params));
            line("service.kind", q.service.kind.as_str());
            line("service.params", &params(&q.service.params));
            line("servers", &q.servers.to_string());
            line("discipline", "FIFO");
            match q.stop {
                StopRule::Customers(n) => {
                    line("stop.kind", "customers");
                    line("stop.limit", &n.to_string());
                }
                StopRule::Time(t) => {
                    line("stop.kind", "time");
                    line("stop.limit", &real(t));
                }
            }
        }
    }
    let o = &spec.output;
    line("output.series", &o.series.join(", "));
    line("output.xlabel", &quoted(&o.xlabel));
    line("output.ylabel", &quoted(&o.ylabel));
    line("output.grid", &o.grid.to_string());
    line("output.legend", &o.legend.to_string());
    line("output.replenishment_markers", &o.replenishment_markers.to_string());
    text.push_str(&out);
    Ok(text)
}

struct Fields<'a> {
    values: HashMap<&'a str, (usize, &'a str)>,
}

impl<'a> Fields<'a> {
    fn raw(&self, key: &str) -> Result<(usize, &'a str), CanonicalError> {
        self.values
            .get(key)
            .copied()
            .ok_or_else(|| CanonicalError::MissingField(key.to_string()))
    }

    fn typed<T>(
        &self,
        key: &str,
        expected: &'static str,
        conv: impl FnOnce(&str) -> Option<T>,
    ) -> Result<T, CanonicalError> {
        let (line, value) = self.raw(key)?;
        conv(value).ok_or_else(|| CanonicalError::TypeMismatch {
            key: key.to_string(),
            line,
            expected,
            found: value.to_string(),
        })
    }

    fn uint(&self, key: &str) -> Result<u64, CanonicalError> {
        self.typed(key, "non-negative integer", |v| v.parse().ok())
    }

    fn int(&self, key: &str) -> Result<i64, CanonicalError> {
        self.typed(key, "integer", |v| v.parse().ok())
    }

    fn boolean(&self, key: &str) -> Result<bool, CanonicalError> {
        self.typed(key, "true or false", |v| match v {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        })
    }

    fn string(&self, key: &str) -> Result<String, CanonicalError> {
        self.typed(key, "quoted string", |v| {
            v.starts_with('"').then(|| serde_json::from_str(v).ok()).flatten()
        })
    }

    fn dist(&self, prefix: &str) -> Result<DistributionSpec, CanonicalError> {
        let kind = self.typed(&format!("{prefix}.kind"), "distribution kind", DistributionKind::parse)?;
        let params = self.typed(&format!("{prefix}.params"), "comma-separated reals", parse_reals)?;
        Ok(DistributionSpec { kind, params })
    }
}

fn parse_real(s: &str) -> Option<f64> {
    // Rust accepts "inf"/"nan"; the format only admits finite decimal literals.
    let s = s.trim();
    let ok = !s.is_empty()
        && s.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'));
    ok.then(|| s.parse::<f64>().ok()).flatten().filter(|v| v.is_finite())
}

fn parse_reals(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(parse_real).collect()
}

/// Parse canonical spec text. The result is structurally typed but not validated.
pub fn parse_canonical(text: &str) -> Result<SimulationSpec, CanonicalError> {
    let mut values: HashMap<&str, (usize, &str)> = HashMap::new();
    let mut order = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = raw.split_once(':').ok_or(CanonicalError::Malformed { line })?;
        let key = key.trim();
        let known = COMMON_KEYS.contains(&key) || INVENTORY_KEYS.contains(&key) || QUEUE_KEYS.contains(&key);
        if !known {
            return Err(CanonicalError::UnknownKey { key: key.to_string(), line });
        }
        if values.insert(key, (line, value.trim())).is_some() {
            return Err(CanonicalError::DuplicateKey { key: key.to_string(), line });
        }
        order.push(key);
    }
    let fields = Fields { values };
    let kind = fields.typed("kind", "inventory or queue", |v| match v {
        "inventory" => Some(SystemKind::Inventory),
        "queue" => Some(SystemKind::Queue),
        _ => None,
    })?;
    let foreign: &[&str] = match kind {
        SystemKind::Inventory => &QUEUE_KEYS,
        SystemKind::Queue => &INVENTORY_KEYS,
    };
    if let Some(key) = order.iter().find(|k| foreign.contains(k)) {
        let line = fields.values[key].0;
        return Err(CanonicalError::UnknownKey { key: key.to_string(), line });
    }
    let seed = fields.uint("seed")?;
    let (inventory, queue) = match kind {
        SystemKind::Inventory => (
            Some(InventoryParams {
                initial_inventory: fields.uint("initial_inventory")?,
                reorder_point: fields.int("reorder_point")?,
                order_quantity: fields.uint("order_quantity")?,
                lead_time: fields.uint("lead_time")?,
                horizon: fields.uint("horizon")?,
                demand: fields.dist("demand")?,
            }),
            None,
        ),
        SystemKind::Queue => {
            let interarrival = fields.dist("interarrival")?;
            let service = fields.dist("service")?;
            let servers = fields.typed("servers", "server count", |v| v.parse().ok())?;
            let discipline = fields.typed("discipline", "FIFO", |v| (v == "FIFO").then_some(Discipline::Fifo))?;
            let stop_kind = fields.typed("stop.kind", "customers or time", |v| match v {
                "customers" | "time" => Some(v.to_string()),
                _ => None,
            })?;
            let stop = if stop_kind == "customers" {
                StopRule::Customers(fields.uint("stop.limit")?)
            } else {
                StopRule::Time(fields.typed("stop.limit", "real", parse_real)?)
            };
            (None, Some(QueueParams { interarrival, service, servers, discipline, stop }))
        }
    };
    let series = fields.typed("output.series", "comma-separated identifiers", |v| {
        let names: Vec<String> = v.split(',').map(|s| s.trim().to_string()).collect();
        names
            .iter()
            .all(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
            .then_some(names)
    })?;
    let output = OutputSpec {
        series,
        xlabel: fields.string("output.xlabel")?,
        ylabel: fields.string("output.ylabel")?,
        grid: fields.boolean("output.grid")?,
        legend: fields.boolean("output.legend")?,
        replenishment_markers: fields.boolean("output.replenishment_markers")?,
    };
    Ok(SimulationSpec { kind, inventory, queue, output, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::tests::worked_inventory;

    #[test]
    fn round_trip_minimal() {
        let spec = worked_inventory();
        let text = serialize_canonical(&spec).unwrap();
        assert!(text.starts_with("## simspec v1\nkind: inventory\nseed: 0\n"));
        assert_eq!(parse_canonical(&text).unwrap(), spec);
        assert_eq!(serialize_canonical(&parse_canonical(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn seed_locality() {
        let a = worked_inventory();
        let mut b = a.clone();
        b.seed = 1;
        let ta = serialize_canonical(&a).unwrap();
        let tb = serialize_canonical(&b).unwrap();
        let diff: Vec<_> = ta.lines().zip(tb.lines()).filter(|(x, y)| x != y).collect();
        assert_eq!(diff, vec![("seed: 0", "seed: 1")]);
    }

    #[test]
    fn negative_zero_is_canonical() {
        let mut a = worked_inventory();
        a.inventory.as_mut().unwrap().demand = DistributionSpec::constant(0.0);
        let mut b = a.clone();
        b.inventory.as_mut().unwrap().demand = DistributionSpec::constant(-0.0);
        assert_eq!(serialize_canonical(&a).unwrap(), serialize_canonical(&b).unwrap());
    }

    #[test]
    fn missing_kind() {
        let text = serialize_canonical(&worked_inventory()).unwrap();
        let without: String = text.lines().filter(|l| !l.starts_with("kind")).map(|l| format!("{l}\n")).collect();
        assert_eq!(parse_canonical(&without), Err(CanonicalError::MissingField("kind".into())));
    }

    #[test]
    fn negative_lead_time() {
        let text = serialize_canonical(&worked_inventory()).unwrap().replace("lead_time: 2", "lead_time: -1");
        match parse_canonical(&text) {
            Err(CanonicalError::TypeMismatch { key, line, .. }) => {
                assert_eq!(key, "lead_time");
                assert_eq!(line, 7);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_and_foreign_keys() {
        let text = serialize_canonical(&worked_inventory()).unwrap();
        let bad = format!("{text}colour: red\n");
        assert!(matches!(parse_canonical(&bad), Err(CanonicalError::UnknownKey { line: 17, .. })));
        let foreign = format!("{text}servers: 1\n");
        assert!(matches!(parse_canonical(&foreign), Err(CanonicalError::UnknownKey { .. })));
        let dup = format!("{text}seed: 4\n");
        assert!(matches!(parse_canonical(&dup), Err(CanonicalError::DuplicateKey { .. })));
        assert!(matches!(parse_canonical("kind inventory"), Err(CanonicalError::Malformed { line: 1 })));
    }

    #[test]
    fn non_finite_params_rejected() {
        let text = serialize_canonical(&worked_inventory()).unwrap().replace("demand.params: 10.0", "demand.params: inf");
        assert!(matches!(parse_canonical(&text), Err(CanonicalError::TypeMismatch { .. })));
    }

    #[test]
    fn invalid_spec_not_serialized() {
        let mut spec = worked_inventory();
        spec.inventory.as_mut().unwrap().horizon = 0;
        assert!(matches!(serialize_canonical(&spec), Err(CanonicalError::Invalid(_))));
    }
}
