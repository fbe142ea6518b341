//! Controlled-English frontend.
//!
//! A description is a list of sentences, each matching one pattern in
//! [`grammar::PATTERNS`], plus optional `name='text'` / `name=number` bindings that
//! set fields directly. Parsing is deterministic and case-insensitive.

pub mod grammar;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ir::{
    validate_spec, Discipline, DistributionKind, DistributionSpec, InventoryParams, OutputSpec, QueueParams,
    SimulationSpec, StopRule, SystemKind, ValidationOutcome, Violation,
};
pub use grammar::{ControlledSentence, Pattern, SlotValue, PATTERNS};
use grammar::{Domain, DISTRIBUTION_PHRASES};

/// Bumped whenever a pattern is added, removed or reworded.
pub const GRAMMAR_VERSION: &str = "controlled-english-1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "value")]
pub enum BindingValue {
    Text(String),
    /// The literal as written, so large integers stay exact.
    Number(String),
}

impl BindingValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            BindingValue::Number(n) => n.parse().ok(),
            BindingValue::Text(_) => None,
        }
    }
}

impl fmt::Display for BindingValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BindingValue::Text(t) if t.contains('\'') => write!(f, "\"{t}\""),
            BindingValue::Text(t) => write!(f, "'{t}'"),
            BindingValue::Number(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableBinding {
    pub name: String,
    pub value: BindingValue,
}

impl fmt::Display for VariableBinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.name, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "error")]
pub enum FrontendErrorKind {
    DuplicateBinding { name: String },
    UnknownBinding { name: String },
    InvalidBinding { name: String, expected: String },
    UnrecognizedSentence { sentence: String, nearest: String },
    MissingParameter { fields: Vec<String> },
    ConflictingParameter { field: String },
    InvalidSpec { violations: Vec<Violation> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontendError {
    pub grammar_version: String,
    #[serde(flatten)]
    pub kind: FrontendErrorKind,
}

impl FrontendError {
    fn new(kind: FrontendErrorKind) -> Self {
        FrontendError { grammar_version: GRAMMAR_VERSION.to_string(), kind }
    }
}

impl fmt::Display for FrontendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FrontendErrorKind::DuplicateBinding { name } => write!(f, "binding `{name}` given more than once"),
            FrontendErrorKind::UnknownBinding { name } => write!(f, "unknown binding `{name}`"),
            FrontendErrorKind::InvalidBinding { name, expected } => {
                write!(f, "binding `{name}` must be {expected}")
            }
            FrontendErrorKind::UnrecognizedSentence { sentence, nearest } => {
                write!(f, "unrecognized sentence \"{sentence}\"; closest pattern: \"{nearest}\"")
            }
            FrontendErrorKind::MissingParameter { fields } => write!(f, "missing: {}", fields.join(", ")),
            FrontendErrorKind::ConflictingParameter { field } => {
                write!(f, "conflicting values for `{field}`")
            }
            FrontendErrorKind::InvalidSpec { violations } => {
                let parts: Vec<_> = violations.iter().map(|v| v.to_string()).collect();
                write!(f, "invalid spec: {}", parts.join("; "))
            }
        }?;
        write!(f, " [{}]", self.grammar_version)
    }
}

impl std::error::Error for FrontendError {}

static BINDING_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r#"(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*=\s*(?:'(?P<single>[^']*)'|"(?P<double>[^"]*)"|(?P<num>-?[0-9]+(?:\.[0-9]+)?))"#,
    )
    .expect("binding regex")
});

/// Placeholder left where a binding was cut out of a sentence.
const BINDING_MARK: &str = "\u{1}";

/// Words allowed around bindings in a sentence that otherwise only carries bindings.
const BINDING_FILLER: &[&str] = &["use", "with", "and", "the", "set", "variables", "variable", "where"];

/// Binding names the frontend understands.
pub const BINDING_NAMES: &[&str] = &[
    "seed",
    "xlabel",
    "ylabel",
    "series",
    "grid",
    "legend",
    "replenishment_markers",
    "initial_inventory",
    "reorder_point",
    "order_quantity",
    "lead_time",
    "horizon",
    "customers",
    "time_limit",
];

/// All `name=value` fragments in order of appearance.
pub fn extract_bindings(text: &str) -> Result<Vec<VariableBinding>, FrontendError> {
    let mut out: Vec<VariableBinding> = Vec::new();
    for caps in BINDING_RE.captures_iter(text) {
        let name = caps["name"].to_string();
        if out.iter().any(|b| b.name == name) {
            return Err(FrontendError::new(FrontendErrorKind::DuplicateBinding { name }));
        }
        let value = if let Some(t) = caps.name("single").or(caps.name("double")) {
            BindingValue::Text(t.as_str().to_string())
        } else {
            BindingValue::Number(caps["num"].to_string())
        };
        out.push(VariableBinding { name, value });
    }
    Ok(out)
}

fn strip_bindings(text: &str) -> String {
    BINDING_RE.replace_all(text, format!(" {BINDING_MARK} ").as_str()).into_owned()
}

/// Split on `.` followed by whitespace or end of text, ignoring quoted stretches.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut quote: Option<char> = None;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => {}
            None if c == '\'' || c == '"' => quote = Some(c),
            None if c == '.' && chars.peek().is_none_or(|n| n.is_whitespace()) => {
                out.push(std::mem::take(&mut current));
                continue;
            }
            None => {}
        }
        current.push(c);
    }
    out.push(current);
    out.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn words(sentence: &str) -> Vec<String> {
    sentence
        .to_lowercase()
        .split_whitespace()
        .flat_map(|w| w.split(','))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

const INVENTORY_STEMS: &[&str] = &["inventory", "stock", "demand", "replenish", "reorder", "order", "warehouse"];
const QUEUE_STEMS: &[&str] = &["customer", "arriv", "serv", "queue", "wait", "teller", "cashier"];

/// Keyword hits per domain, as (inventory, queue). Bindings are ignored.
pub fn domain_scores(text: &str) -> (usize, usize) {
    let text = strip_bindings(text).to_lowercase();
    let mut inv = 0;
    let mut queue = 0;
    for word in text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
        inv += INVENTORY_STEMS.iter().filter(|s| word.starts_with(*s)).count();
        queue += QUEUE_STEMS.iter().filter(|s| word.starts_with(*s)).count();
    }
    (inv, queue)
}

/// Majority vote over keyword stems; `None` on a tie (including no hits).
pub fn classify_domain(text: &str) -> Option<SystemKind> {
    match domain_scores(text) {
        (i, q) if i > q => Some(SystemKind::Inventory),
        (i, q) if q > i => Some(SystemKind::Queue),
        _ => None,
    }
}

/// Match one sentence against the grammar.
pub fn match_sentence(sentence: &str) -> Result<ControlledSentence, FrontendError> {
    let w = words(sentence);
    let refs: Vec<&str> = w.iter().map(String::as_str).collect();
    PATTERNS.iter().find_map(|p| grammar::match_pattern(p, &refs)).ok_or_else(|| {
        FrontendError::new(FrontendErrorKind::UnrecognizedSentence {
            sentence: sentence.to_string(),
            nearest: grammar::nearest_pattern(&w.join(" ")).template.to_string(),
        })
    })
}

/// Everything the parser extracted from a description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub grammar_version: String,
    pub sentences: Vec<ControlledSentence>,
    pub bindings: Vec<VariableBinding>,
    pub spec: SimulationSpec,
}

#[derive(Debug, Clone, PartialEq)]
enum Field {
    Int(i128),
    Num(f64),
    Dist(DistributionSpec),
    Text(String),
    Bool(bool),
    Stop(StopRule),
}

#[derive(Default)]
struct Fields(BTreeMap<&'static str, Field>);

impl Fields {
    fn set(&mut self, name: &'static str, value: Field) -> Result<(), FrontendError> {
        match self.0.get(name) {
            Some(old) if *old != value => {
                Err(FrontendError::new(FrontendErrorKind::ConflictingParameter { field: name.to_string() }))
            }
            _ => {
                self.0.insert(name, value);
                Ok(())
            }
        }
    }
}

fn field_domain(name: &str) -> Domain {
    match name {
        "initial_inventory" | "reorder_point" | "order_quantity" | "lead_time" | "horizon" | "demand" => {
            Domain::Inventory
        }
        "interarrival" | "service" | "stop" => Domain::Queue,
        _ => Domain::Any,
    }
}

fn static_name(name: &str) -> &'static str {
    const OTHER: &[&str] = &["demand", "interarrival", "service", "stop", "replenishment_markers"];
    BINDING_NAMES.iter().chain(OTHER).find(|n| **n == name).copied().expect("known field name")
}

fn apply_sentence(sentence: &ControlledSentence, fields: &mut Fields) -> Result<(), FrontendError> {
    match sentence.pattern_id.as_str() {
        "show_grid" => return fields.set("grid", Field::Bool(true)),
        "show_legend" => return fields.set("legend", Field::Bool(true)),
        "show_grid_and_legend" => {
            fields.set("grid", Field::Bool(true))?;
            return fields.set("legend", Field::Bool(true));
        }
        "show_markers" => return fields.set("replenishment_markers", Field::Bool(true)),
        _ => {}
    }
    for (name, value) in &sentence.captures {
        let (field, value) = match (name.as_str(), value) {
            ("interarrival_mean", v) => ("interarrival", Field::Dist(DistributionSpec::exponential(slot_num(v)))),
            ("service_mean", v) => ("service", Field::Dist(DistributionSpec::exponential(slot_num(v)))),
            ("customers", SlotValue::Int(n)) => ("stop", customers_stop(*n)?),
            ("time_limit", v) => ("stop", Field::Stop(StopRule::Time(slot_num(v)))),
            (other, SlotValue::Int(n)) => (static_name(other), Field::Int(*n)),
            (other, SlotValue::Num(n)) => (static_name(other), Field::Num(*n)),
            (other, SlotValue::Dist(d)) => (static_name(other), Field::Dist(d.clone())),
        };
        fields.set(field, value)?;
    }
    Ok(())
}

fn slot_num(v: &SlotValue) -> f64 {
    match v {
        SlotValue::Int(i) => *i as f64,
        SlotValue::Num(n) => *n,
        SlotValue::Dist(d) => d.mean(),
    }
}

fn customers_stop(n: i128) -> Result<Field, FrontendError> {
    u64::try_from(n).map(|n| Field::Stop(StopRule::Customers(n))).map_err(|_| {
        FrontendError::new(FrontendErrorKind::InvalidSpec {
            violations: vec![Violation::new("stop.limit", "stop bound positive")],
        })
    })
}

fn apply_binding(binding: &VariableBinding, fields: &mut Fields) -> Result<(), FrontendError> {
    let name = binding.name.as_str();
    let invalid = |expected: &str| {
        FrontendError::new(FrontendErrorKind::InvalidBinding { name: name.to_string(), expected: expected.to_string() })
    };
    let integer = || match &binding.value {
        BindingValue::Number(n) => n.parse::<i128>().map_err(|_| invalid("an integer")),
        BindingValue::Text(_) => Err(invalid("an integer")),
    };
    let (field, value) = match name {
        "xlabel" | "ylabel" | "series" => match &binding.value {
            BindingValue::Text(t) => (static_name(name), Field::Text(t.clone())),
            BindingValue::Number(_) => return Err(invalid("quoted text")),
        },
        "grid" | "legend" | "replenishment_markers" => {
            let b = match &binding.value {
                BindingValue::Number(n) if n == "0" || n == "1" => n == "1",
                BindingValue::Text(t) => match t.to_lowercase().as_str() {
                    "true" | "yes" | "on" => true,
                    "false" | "no" | "off" => false,
                    _ => return Err(invalid("true or false")),
                },
                _ => return Err(invalid("true or false")),
            };
            (static_name(name), Field::Bool(b))
        }
        "customers" => ("stop", customers_stop(integer()?)?),
        "time_limit" => match &binding.value {
            BindingValue::Number(n) => ("stop", Field::Stop(StopRule::Time(n.parse().expect("regex guarantees a number")))),
            BindingValue::Text(_) => return Err(invalid("a number")),
        },
        n if BINDING_NAMES.contains(&n) => (static_name(n), Field::Int(integer()?)),
        _ => return Err(FrontendError::new(FrontendErrorKind::UnknownBinding { name: name.to_string() })),
    };
    fields.set(field, value)
}

/// Parse a description into a spec, keeping the intermediate pieces.
pub fn analyze(text: &str) -> Result<Analysis, FrontendError> {
    let bindings = extract_bindings(text)?;
    let mut fields = Fields::default();
    let mut sentences = Vec::new();
    for sentence in segment_sentences(&strip_bindings(text)) {
        if sentence.contains(BINDING_MARK) {
            let rest: Vec<String> = words(&sentence.replace(BINDING_MARK, " "));
            if rest.iter().all(|w| BINDING_FILLER.contains(&w.as_str())) {
                continue;
            }
        }
        let clean = sentence.replace(BINDING_MARK, "").split_whitespace().collect::<Vec<_>>().join(" ");
        let matched = match_sentence(&clean)?;
        apply_sentence(&matched, &mut fields)?;
        sentences.push(matched);
    }
    for b in &bindings {
        apply_binding(b, &mut fields)?;
    }

    let mut domains = fields.0.keys().map(|k| field_domain(k)).chain(
        sentences.iter().filter_map(|s| grammar::find_pattern(&s.pattern_id)).map(|p| p.domain),
    );
    let inv = domains.clone().any(|d| d == Domain::Inventory);
    let queue = domains.any(|d| d == Domain::Queue);
    let kind = match (inv, queue) {
        (true, true) => {
            return Err(FrontendError::new(FrontendErrorKind::ConflictingParameter { field: "kind".into() }))
        }
        (true, false) => SystemKind::Inventory,
        (false, true) => SystemKind::Queue,
        (false, false) => classify_domain(text)
            .ok_or_else(|| FrontendError::new(FrontendErrorKind::MissingParameter { fields: vec!["kind".into()] }))?,
    };

    let spec = build_spec(kind, &fields)?;
    if let ValidationOutcome::Violations(violations) = validate_spec(&spec) {
        return Err(FrontendError::new(FrontendErrorKind::InvalidSpec { violations }));
    }
    Ok(Analysis { grammar_version: GRAMMAR_VERSION.to_string(), sentences, bindings, spec })
}

/// Parse a controlled-English description into a validated spec.
pub fn parse_controlled(text: &str) -> Result<SimulationSpec, FrontendError> {
    analyze(text).map(|a| a.spec)
}

fn build_spec(kind: SystemKind, fields: &Fields) -> Result<SimulationSpec, FrontendError> {
    let required: &[&str] = match kind {
        SystemKind::Inventory => &["horizon", "initial_inventory", "demand", "reorder_point", "order_quantity", "lead_time"],
        SystemKind::Queue => &["interarrival", "service", "stop"],
    };
    let missing: Vec<String> =
        required.iter().filter(|f| !fields.0.contains_key(*f)).map(|f| f.to_string()).collect();
    if !missing.is_empty() {
        return Err(FrontendError::new(FrontendErrorKind::MissingParameter { fields: missing }));
    }

    let mut violations = Vec::new();
    let unsigned = |name: &str, violations: &mut Vec<Violation>| match fields.0.get(name) {
        Some(Field::Int(n)) => u64::try_from(*n).unwrap_or_else(|_| {
            violations.push(Violation::new(name, "must be a non-negative integer within range"));
            0
        }),
        _ => 0,
    };
    let seed = unsigned("seed", &mut violations);
    let dist = |name: &str| match fields.0.get(name) {
        Some(Field::Dist(d)) => d.clone(),
        _ => unreachable!("required field {name} checked above"),
    };

    let mut spec = match kind {
        SystemKind::Inventory => {
            let params = InventoryParams {
                initial_inventory: unsigned("initial_inventory", &mut violations),
                reorder_point: match fields.0.get("reorder_point") {
                    Some(Field::Int(n)) => i64::try_from(*n).unwrap_or_else(|_| {
                        violations.push(Violation::new("reorder_point", "out of range"));
                        0
                    }),
                    _ => 0,
                },
                order_quantity: unsigned("order_quantity", &mut violations),
                lead_time: unsigned("lead_time", &mut violations),
                demand: dist("demand"),
                horizon: unsigned("horizon", &mut violations),
            };
            SimulationSpec::inventory(params, seed)
        }
        SystemKind::Queue => {
            let stop = match fields.0.get("stop") {
                Some(Field::Stop(s)) => *s,
                _ => unreachable!("stop checked above"),
            };
            let params = QueueParams {
                interarrival: dist("interarrival"),
                service: dist("service"),
                servers: 1,
                discipline: Discipline::Fifo,
                stop,
            };
            SimulationSpec::queue(params, seed)
        }
    };
    if !violations.is_empty() {
        return Err(FrontendError::new(FrontendErrorKind::InvalidSpec { violations }));
    }

    let out = &mut spec.output;
    for (name, value) in &fields.0 {
        match (*name, value) {
            ("xlabel", Field::Text(t)) => out.xlabel = t.clone(),
            ("ylabel", Field::Text(t)) => out.ylabel = t.clone(),
            ("series", Field::Text(t)) => {
                out.series = t.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
            }
            ("grid", Field::Bool(b)) => out.grid = *b,
            ("legend", Field::Bool(b)) => out.legend = *b,
            ("replenishment_markers", Field::Bool(b)) => out.replenishment_markers = *b,
            _ => {}
        }
    }
    Ok(spec)
}

fn render_dist(d: &DistributionSpec) -> String {
    let phrase = DISTRIBUTION_PHRASES
        .iter()
        .find(|(k, _)| *k == d.kind.as_str())
        .map(|(_, p)| *p)
        .expect("every kind has a phrase");
    let names: &[&str] = match d.kind {
        DistributionKind::Constant => &["{value:num}"],
        DistributionKind::Exponential => &["{mean:num}"],
        DistributionKind::UniformInt | DistributionKind::UniformReal => &["{low:num}", "{high:num}"],
    };
    names.iter().zip(&d.params).fold(phrase.to_string(), |s, (slot, v)| s.replace(slot, &v.to_string()))
}

/// Render a spec back to controlled English. Parsing the result yields the same spec,
/// provided no label contains both quote characters.
pub fn render(spec: &SimulationSpec) -> String {
    let mut s: Vec<String> = Vec::new();
    if let Some(inv) = &spec.inventory {
        s.push(format!("Simulate an inventory system for {} days.", inv.horizon));
        s.push(format!("The initial inventory is {} units.", inv.initial_inventory));
        s.push(format!("Daily demand is {} units.", render_dist(&inv.demand)));
        s.push(format!(
            "When inventory falls to {} units or below, order {} units.",
            inv.reorder_point, inv.order_quantity
        ));
        s.push(format!("Orders arrive after {} days.", inv.lead_time));
    }
    if let Some(q) = &spec.queue {
        s.push("Customers arrive and are served by a single server.".into());
        s.push(format!("Time between arrivals is {} minutes.", render_dist(&q.interarrival)));
        s.push(format!("Service time is {} minutes.", render_dist(&q.service)));
        s.push(match q.stop {
            StopRule::Customers(n) => format!("Simulate {n} customers."),
            StopRule::Time(t) => format!("Simulate for {t} minutes."),
        });
    }
    s.push(format!("Use random seed {}.", spec.seed));

    let default = OutputSpec::default_for(spec.kind);
    let out = &spec.output;
    let mut bindings = Vec::new();
    let text = |name: &str, t: &str| VariableBinding { name: name.into(), value: BindingValue::Text(t.into()) };
    if out.xlabel != default.xlabel {
        bindings.push(text("xlabel", &out.xlabel));
    }
    if out.ylabel != default.ylabel {
        bindings.push(text("ylabel", &out.ylabel));
    }
    if out.series != default.series {
        bindings.push(text("series", &out.series.join(", ")));
    }
    if !bindings.is_empty() {
        let parts: Vec<String> = bindings.iter().map(|b| b.to_string()).collect();
        s.push(format!("Use {}.", parts.join(", ")));
    }
    if out.grid {
        s.push("Show the grid.".into());
    }
    if out.legend {
        s.push("Show the legend.".into());
    }
    if out.replenishment_markers {
        s.push("Mark replenishment days on the plot.".into());
    }
    s.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::tests::worked_inventory;

    const INVENTORY_TEXT: &str = "Simulate an inventory system for 10 days. The initial inventory is 100 units. \
        Daily demand is constant at 10 units. When inventory falls to 30 units or below, order 50 units. \
        Orders arrive after 2 days.";

    const QUEUE_TEXT: &str = "Customers arrive on average every 2.0 minutes, exponentially distributed. \
        Service takes on average 1.0 minutes, exponentially distributed. Simulate 1000 customers.";

    fn kind(err: FrontendError) -> FrontendErrorKind {
        assert_eq!(err.grammar_version, GRAMMAR_VERSION);
        err.kind
    }

    #[test]
    fn inventory_example() {
        assert_eq!(parse_controlled(INVENTORY_TEXT).unwrap(), worked_inventory());
    }

    #[test]
    fn queue_example() {
        let spec = parse_controlled(QUEUE_TEXT).unwrap();
        let q = spec.queue.unwrap();
        assert_eq!(q.interarrival, DistributionSpec::exponential(2.0));
        assert_eq!(q.service, DistributionSpec::exponential(1.0));
        assert_eq!(q.stop, StopRule::Customers(1000));
        assert_eq!(q.servers, 1);
        assert_eq!(spec.kind, SystemKind::Queue);
    }

    #[test]
    fn case_and_whitespace_insensitive() {
        let shouty = INVENTORY_TEXT.to_uppercase().replace(' ', "   ");
        assert_eq!(parse_controlled(&shouty).unwrap(), worked_inventory());
    }

    #[test]
    fn missing_parameters_listed() {
        let text = "Simulate an inventory system for 10 days. The initial inventory is 100 units.";
        match kind(parse_controlled(text).unwrap_err()) {
            FrontendErrorKind::MissingParameter { fields } => {
                assert_eq!(fields, ["demand", "reorder_point", "order_quantity", "lead_time"])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn conflicting_values() {
        let text = format!("{INVENTORY_TEXT} Orders arrive after 3 days.");
        assert_eq!(
            kind(parse_controlled(&text).unwrap_err()),
            FrontendErrorKind::ConflictingParameter { field: "lead_time".into() }
        );
        // Repeating the same value is harmless.
        let text = format!("{INVENTORY_TEXT} Orders arrive after 2 days.");
        assert!(parse_controlled(&text).is_ok());
        let text = format!("{INVENTORY_TEXT} lead_time=5.");
        assert!(matches!(
            kind(parse_controlled(&text).unwrap_err()),
            FrontendErrorKind::ConflictingParameter { .. }
        ));
    }

    #[test]
    fn mixed_domains_conflict() {
        let text = format!("{INVENTORY_TEXT} Simulate 100 customers.");
        assert_eq!(
            kind(parse_controlled(&text).unwrap_err()),
            FrontendErrorKind::ConflictingParameter { field: "kind".into() }
        );
    }

    #[test]
    fn unrecognized_sentence_suggests_nearest() {
        let text = "Simulate an inventory system for 10 days. The starting inventory is 100 units.";
        match kind(parse_controlled(text).unwrap_err()) {
            FrontendErrorKind::UnrecognizedSentence { sentence, nearest } => {
                assert_eq!(sentence, "The starting inventory is 100 units");
                assert_eq!(nearest, "the initial inventory is {initial_inventory:int} units");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bindings_set_fields() {
        let text = format!(
            "{INVENTORY_TEXT} Use xlabel='day', ylabel=\"units on hand\", series='on_hand, lost', seed=7. Show grid and legend."
        );
        let a = analyze(&text).unwrap();
        assert_eq!(a.bindings.len(), 4);
        let out = &a.spec.output;
        assert_eq!(out.xlabel, "day");
        assert_eq!(out.ylabel, "units on hand");
        assert_eq!(out.series, ["on_hand", "lost"]);
        assert!(out.grid && out.legend && !out.replenishment_markers);
        assert_eq!(a.spec.seed, 7);
    }

    #[test]
    fn binding_errors() {
        let dup = format!("{INVENTORY_TEXT} Use seed=1, seed=1.");
        assert_eq!(
            kind(parse_controlled(&dup).unwrap_err()),
            FrontendErrorKind::DuplicateBinding { name: "seed".into() }
        );
        let unknown = format!("{INVENTORY_TEXT} Use colour='red'.");
        assert_eq!(
            kind(parse_controlled(&unknown).unwrap_err()),
            FrontendErrorKind::UnknownBinding { name: "colour".into() }
        );
        let bad = format!("{INVENTORY_TEXT} Use horizon=2.5.");
        assert!(matches!(kind(parse_controlled(&bad).unwrap_err()), FrontendErrorKind::InvalidBinding { .. }));
    }

    #[test]
    fn bindings_alone_describe_a_system() {
        let text = "Daily demand is constant at 10 units. Use horizon=10, initial_inventory=100, reorder_point=30, \
                    order_quantity=50, lead_time=2.";
        assert_eq!(parse_controlled(text).unwrap(), worked_inventory());
    }

    #[test]
    fn periods_inside_labels_do_not_split() {
        let text = format!("{INVENTORY_TEXT} Use ylabel='units. on hand'.");
        assert_eq!(parse_controlled(&text).unwrap().output.ylabel, "units. on hand");
    }

    #[test]
    fn invalid_values_reported_as_violations() {
        let text = INVENTORY_TEXT.replace("order 50", "order 0");
        assert!(matches!(kind(parse_controlled(&text).unwrap_err()), FrontendErrorKind::InvalidSpec { .. }));
        let text = INVENTORY_TEXT.replace("for 10 days", "for -10 days");
        assert!(matches!(kind(parse_controlled(&text).unwrap_err()), FrontendErrorKind::InvalidSpec { .. }));
    }

    #[test]
    fn classification() {
        assert_eq!(classify_domain(INVENTORY_TEXT), Some(SystemKind::Inventory));
        assert_eq!(classify_domain(QUEUE_TEXT), Some(SystemKind::Queue));
        assert_eq!(classify_domain("Model a warehouse."), Some(SystemKind::Inventory));
        assert_eq!(classify_domain("A bank teller serves people."), Some(SystemKind::Queue));
        assert_eq!(classify_domain("Simulate something."), None);
        assert_eq!(classify_domain("stock and customers"), None);
        // Binding text does not vote.
        assert_eq!(classify_domain("ylabel='customers waiting' warehouse"), Some(SystemKind::Inventory));
    }

    #[test]
    fn render_round_trips_examples() {
        for text in [INVENTORY_TEXT, QUEUE_TEXT] {
            let spec = parse_controlled(text).unwrap();
            assert_eq!(parse_controlled(&render(&spec)).unwrap(), spec);
        }
    }

    #[test]
    fn error_serializes_with_version() {
        let err = parse_controlled("Hello there.").unwrap_err();
        let json = serde_json::to_value(&err).unwrap();
        assert_eq!(json["grammar_version"], GRAMMAR_VERSION);
        assert_eq!(json["error"], "unrecognized_sentence");
    }
}
