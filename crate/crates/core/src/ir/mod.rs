//! Simulation intermediate representation.
//!
//! Every frontend (controlled English, LLM completions) produces a [`SimulationSpec`]
//! and every backend (reference engines, code generation) consumes one.

mod canonical;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use canonical::{parse_canonical, serialize_canonical, CanonicalError, SPEC_SENTINEL};

/// Largest integer quantity accepted, keeping every unit count exact in `f64`.
pub const MAX_UNITS: u64 = 1 << 40;

pub const INVENTORY_SERIES: [&str; 5] = ["on_hand", "demand", "received", "fulfilled", "lost"];
pub const QUEUE_SERIES: [&str; 4] = ["system_size", "busy", "wait", "sojourn"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Inventory,
    Queue,
}

impl SystemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::Inventory => "inventory",
            SystemKind::Queue => "queue",
        }
    }

    pub fn known_series(self) -> &'static [&'static str] {
        match self {
            SystemKind::Inventory => &INVENTORY_SERIES,
            SystemKind::Queue => &QUEUE_SERIES,
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Constant,
    UniformInt,
    UniformReal,
    Exponential,
}

impl DistributionKind {
    pub const ALL: [DistributionKind; 4] = [
        DistributionKind::Constant,
        DistributionKind::UniformInt,
        DistributionKind::UniformReal,
        DistributionKind::Exponential,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistributionKind::Constant => "constant",
            DistributionKind::UniformInt => "uniform_int",
            DistributionKind::UniformReal => "uniform_real",
            DistributionKind::Exponential => "exponential",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn arity(self) -> usize {
        match self {
            DistributionKind::Constant | DistributionKind::Exponential => 1,
            DistributionKind::UniformInt | DistributionKind::UniformReal => 2,
        }
    }
}

/// A sampling distribution: `constant(value)`, `uniform_*(low, high)` or `exponential(mean)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub kind: DistributionKind,
    pub params: Vec<f64>,
}

impl DistributionSpec {
    pub fn constant(value: f64) -> Self {
        Self { kind: DistributionKind::Constant, params: vec![value] }
    }

    pub fn uniform_int(low: f64, high: f64) -> Self {
        Self { kind: DistributionKind::UniformInt, params: vec![low, high] }
    }

    pub fn uniform_real(low: f64, high: f64) -> Self {
        Self { kind: DistributionKind::UniformReal, params: vec![low, high] }
    }

    pub fn exponential(mean: f64) -> Self {
        Self { kind: DistributionKind::Exponential, params: vec![mean] }
    }

    /// Expected value of one draw.
    pub fn mean(&self) -> f64 {
        match self.kind {
            DistributionKind::Constant | DistributionKind::Exponential => self.params[0],
            DistributionKind::UniformInt | DistributionKind::UniformReal => {
                (self.params[0] + self.params[1]) / 2.0
            }
        }
    }

    fn check(&self, path: &str, out: &mut Vec<Violation>) {
        let params_path = format!("{path}.params");
        if self.params.len() != self.kind.arity() {
            out.push(Violation::new(
                &params_path,
                format!("{} takes exactly {} parameter(s)", self.kind.as_str(), self.kind.arity()),
            ));
            return;
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            out.push(Violation::new(&params_path, "all parameters finite"));
            return;
        }
        match self.kind {
            DistributionKind::Constant => {}
            DistributionKind::UniformInt | DistributionKind::UniformReal => {
                if self.params[0] > self.params[1] {
                    out.push(Violation::new(&params_path, "uniform requires low ≤ high"));
                }
                if self.kind == DistributionKind::UniformInt
                    && self.params.iter().any(|p| p.fract() != 0.0)
                {
                    out.push(Violation::new(&params_path, "uniform_int bounds must be integers"));
                }
            }
            DistributionKind::Exponential => {
                if self.params[0] <= 0.0 {
                    out.push(Violation::new(&params_path, "exponential mean > 0"));
                }
            }
        }
    }

    fn min_value(&self) -> f64 {
        match self.kind {
            DistributionKind::Exponential => 0.0,
            _ => self.params[0],
        }
    }
}

/// Single-product (s, Q) inventory system with lost sales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryParams {
    pub initial_inventory: u64,
    /// May be negative; `-1` disables reordering since the position never drops below zero.
    pub reorder_point: i64,
    pub order_quantity: u64,
    pub lead_time: u64,
    /// Per-day demand; draws are truncated to non-negative integers.
    pub demand: DistributionSpec,
    pub horizon: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Discipline {
    #[serde(rename = "FIFO")]
    Fifo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop after this many customers have departed; no further arrivals are generated.
    Customers(u64),
    /// Stop at this simulated time.
    Time(f64),
}

/// Single-server FIFO queue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueParams {
    pub interarrival: DistributionSpec,
    pub service: DistributionSpec,
    pub servers: u32,
    pub discipline: Discipline,
    pub stop: StopRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub series: Vec<String>,
    pub xlabel: String,
    pub ylabel: String,
    pub grid: bool,
    pub legend: bool,
    pub replenishment_markers: bool,
}

impl OutputSpec {
    pub fn default_for(kind: SystemKind) -> Self {
        let ylabel = match kind {
            SystemKind::Inventory => "inventory",
            SystemKind::Queue => "customers in system",
        };
        Self {
            series: kind.known_series().iter().map(|s| s.to_string()).collect(),
            xlabel: "time".into(),
            ylabel: ylabel.into(),
            grid: false,
            legend: false,
            replenishment_markers: false,
        }
    }

    pub fn records(&self, series: &str) -> bool {
        self.series.iter().any(|s| s == series)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub kind: SystemKind,
    pub inventory: Option<InventoryParams>,
    pub queue: Option<QueueParams>,
    pub output: OutputSpec,
    pub seed: u64,
}

impl SimulationSpec {
    pub fn inventory(params: InventoryParams, seed: u64) -> Self {
        Self {
            kind: SystemKind::Inventory,
            inventory: Some(params),
            queue: None,
            output: OutputSpec::default_for(SystemKind::Inventory),
            seed,
        }
    }

    pub fn queue(params: QueueParams, seed: u64) -> Self {
        Self {
            kind: SystemKind::Queue,
            inventory: None,
            queue: Some(params),
            output: OutputSpec::default_for(SystemKind::Queue),
            seed,
        }
    }
}

/// One broken invariant, located by its canonical key path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: &str, message: impl Into<String>) -> Self {
        Self { path: path.to_string(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "violations", rename_all = "snake_case")]
pub enum ValidationOutcome {
    Ok,
    Violations(Vec<Violation>),
}

impl ValidationOutcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, ValidationOutcome::Ok)
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            ValidationOutcome::Ok => &[],
            ValidationOutcome::Violations(v) => v,
        }
    }
}

/// Check every type invariant; all violations are reported, not just the first.
pub fn validate_spec(spec: &SimulationSpec) -> ValidationOutcome {
    let mut out = Vec::new();
    match (spec.kind, &spec.inventory, &spec.queue) {
        (SystemKind::Inventory, Some(inv), None) => check_inventory(inv, &mut out),
        (SystemKind::Queue, None, Some(q)) => check_queue(q, &mut out),
        _ => out.push(Violation::new(
            "kind",
            "exactly one of inventory/queue populated, matching kind",
        )),
    }
    check_output(spec.kind, &spec.output, &mut out);
    if out.is_empty() {
        ValidationOutcome::Ok
    } else {
        ValidationOutcome::Violations(out)
    }
}

fn check_inventory(inv: &InventoryParams, out: &mut Vec<Violation>) {
    if inv.order_quantity == 0 {
        out.push(Violation::new("order_quantity", "order_quantity > 0"));
    }
    if inv.horizon == 0 {
        out.push(Violation::new("horizon", "horizon ≥ 1"));
    }
    for (path, v) in [
        ("initial_inventory", inv.initial_inventory),
        ("order_quantity", inv.order_quantity),
        ("lead_time", inv.lead_time),
        ("horizon", inv.horizon),
        ("reorder_point", inv.reorder_point.unsigned_abs()),
    ] {
        if v > MAX_UNITS {
            out.push(Violation::new(path, format!("magnitude ≤ {MAX_UNITS}")));
        }
    }
    let before = out.len();
    inv.demand.check("demand", out);
    if out.len() == before {
        let upper = inv.demand.params.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if upper > MAX_UNITS as f64 {
            out.push(Violation::new("demand.params", format!("magnitude ≤ {MAX_UNITS}")));
        }
    }
}

fn check_queue(q: &QueueParams, out: &mut Vec<Violation>) {
    if q.servers != 1 {
        out.push(Violation::new("servers", "servers = 1"));
    }
    for (path, dist) in [("interarrival", &q.interarrival), ("service", &q.service)] {
        let before = out.len();
        dist.check(path, out);
        if out.len() == before && dist.min_value() < 0.0 {
            out.push(Violation::new(&format!("{path}.params"), "draws must be non-negative"));
        }
    }
    if q.interarrival.params.first().is_some_and(|p| p.is_finite())
        && q.interarrival.params.len() == q.interarrival.kind.arity()
        && q.interarrival.mean() <= 0.0
    {
        out.push(Violation::new("interarrival.params", "interarrival mean > 0"));
    }
    match q.stop {
        StopRule::Customers(n) => {
            if n == 0 {
                out.push(Violation::new("stop.limit", "stop bound positive"));
            } else if n > MAX_UNITS {
                out.push(Violation::new("stop.limit", format!("magnitude ≤ {MAX_UNITS}")));
            }
        }
        StopRule::Time(t) => {
            if !(t.is_finite() && t > 0.0) {
                out.push(Violation::new("stop.limit", "stop bound positive"));
            }
        }
    }
}

fn check_output(kind: SystemKind, output: &OutputSpec, out: &mut Vec<Violation>) {
    if output.series.is_empty() {
        out.push(Violation::new("output.series", "series non-empty"));
    }
    let mut seen = HashSet::new();
    for name in &output.series {
        if !seen.insert(name.as_str()) {
            out.push(Violation::new("output.series", format!("identifiers unique ({name})")));
        }
        if !kind.known_series().contains(&name.as_str()) {
            out.push(Violation::new(
                "output.series",
                format!("unknown series {name:?} for {kind}"),
            ));
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn worked_inventory() -> SimulationSpec {
        SimulationSpec::inventory(
            InventoryParams {
                initial_inventory: 100,
                reorder_point: 30,
                order_quantity: 50,
                lead_time: 2,
                demand: DistributionSpec::constant(10.0),
                horizon: 10,
            },
            0,
        )
    }

    fn queue(interarrival: DistributionSpec) -> SimulationSpec {
        SimulationSpec::queue(
            QueueParams {
                interarrival,
                service: DistributionSpec::exponential(1.0),
                servers: 1,
                discipline: Discipline::Fifo,
                stop: StopRule::Customers(10),
            },
            0,
        )
    }

    #[test]
    fn well_formed_inventory() {
        assert_eq!(validate_spec(&worked_inventory()), ValidationOutcome::Ok);
    }

    #[test]
    fn zero_horizon() {
        let mut spec = worked_inventory();
        spec.inventory.as_mut().unwrap().horizon = 0;
        let outcome = validate_spec(&spec);
        assert_eq!(outcome.violations(), &[Violation::new("horizon", "horizon ≥ 1")]);
    }

    #[test]
    fn negative_exponential_mean() {
        let outcome = validate_spec(&queue(DistributionSpec::exponential(-1.0)));
        assert!(outcome
            .violations()
            .iter()
            .any(|v| v.path == "interarrival.params" && v.message == "exponential mean > 0"));
    }

    #[test]
    fn kind_mismatch_and_bad_series() {
        let mut spec = worked_inventory();
        spec.kind = SystemKind::Queue;
        spec.output.series = vec!["on_hand".into(), "on_hand".into()];
        let v = validate_spec(&spec);
        let paths: Vec<_> = v.violations().iter().map(|v| v.path.as_str()).collect();
        assert!(paths.contains(&"kind"));
        assert_eq!(paths.iter().filter(|p| **p == "output.series").count(), 3);
    }

    #[test]
    fn distribution_shape_rules() {
        let mut spec = worked_inventory();
        let inv = spec.inventory.as_mut().unwrap();
        inv.demand = DistributionSpec { kind: DistributionKind::Constant, params: vec![1.0, 2.0] };
        assert!(!validate_spec(&spec).is_ok());
        spec.inventory.as_mut().unwrap().demand = DistributionSpec::uniform_int(5.0, 2.0);
        assert_eq!(validate_spec(&spec).violations()[0].message, "uniform requires low ≤ high");
        spec.inventory.as_mut().unwrap().demand = DistributionSpec::uniform_int(1.5, 2.0);
        assert!(!validate_spec(&spec).is_ok());
        spec.inventory.as_mut().unwrap().demand = DistributionSpec::constant(f64::NAN);
        assert_eq!(validate_spec(&spec).violations()[0].message, "all parameters finite");
    }

    #[test]
    fn queue_rules() {
        assert!(validate_spec(&queue(DistributionSpec::constant(2.0))).is_ok());
        assert!(!validate_spec(&queue(DistributionSpec::constant(0.0))).is_ok());
        assert!(!validate_spec(&queue(DistributionSpec::uniform_real(-1.0, 3.0))).is_ok());
        let mut spec = queue(DistributionSpec::constant(1.0));
        spec.queue.as_mut().unwrap().servers = 2;
        spec.queue.as_mut().unwrap().stop = StopRule::Time(0.0);
        assert_eq!(validate_spec(&spec).violations().len(), 2);
    }
}
