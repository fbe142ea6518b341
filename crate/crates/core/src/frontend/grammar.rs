//! Sentence patterns of the controlled grammar and the matcher.
//!
//! A pattern is a sequence of literal words and typed slots: `{name:int}` (optionally
//! signed integer), `{name:num}` (integer or decimal) and `{name:dist}` (one of the
//! distribution phrases below). Matching is on lowercase words with commas dropped.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ir::{DistributionSpec, SystemKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Inventory,
    Queue,
    Any,
}

impl Domain {
    pub fn kind(self) -> Option<SystemKind> {
        match self {
            Domain::Inventory => Some(SystemKind::Inventory),
            Domain::Queue => Some(SystemKind::Queue),
            Domain::Any => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Pattern {
    pub id: &'static str,
    pub domain: Domain,
    pub template: &'static str,
}

const fn p(id: &'static str, domain: Domain, template: &'static str) -> Pattern {
    Pattern { id, domain, template }
}

pub const PATTERNS: &[Pattern] = &[
    p("inventory_horizon", Domain::Inventory, "simulate an inventory system for {horizon:int} days"),
    p("inventory_initial", Domain::Inventory, "the initial inventory is {initial_inventory:int} units"),
    p("inventory_demand", Domain::Inventory, "daily demand is {demand:dist} units"),
    p(
        "inventory_policy",
        Domain::Inventory,
        "when inventory falls to {reorder_point:int} units or below order {order_quantity:int} units",
    ),
    p("inventory_lead_time", Domain::Inventory, "orders arrive after {lead_time:int} days"),
    p("queue_context", Domain::Queue, "customers arrive and are served by a single server"),
    p(
        "queue_arrivals_exponential",
        Domain::Queue,
        "customers arrive on average every {interarrival_mean:num} minutes exponentially distributed",
    ),
    p(
        "queue_service_exponential",
        Domain::Queue,
        "service takes on average {service_mean:num} minutes exponentially distributed",
    ),
    p("queue_interarrival", Domain::Queue, "time between arrivals is {interarrival:dist} minutes"),
    p("queue_service", Domain::Queue, "service time is {service:dist} minutes"),
    p("queue_stop_customers", Domain::Queue, "simulate {customers:int} customers"),
    p("queue_stop_time", Domain::Queue, "simulate for {time_limit:num} minutes"),
    p("seed", Domain::Any, "use random seed {seed:int}"),
    p("show_grid", Domain::Any, "show the grid"),
    p("show_legend", Domain::Any, "show the legend"),
    p("show_grid_and_legend", Domain::Any, "show grid and legend"),
    p("show_markers", Domain::Any, "mark replenishment days on the plot"),
];

/// Phrases accepted by a `{name:dist}` slot.
pub const DISTRIBUTION_PHRASES: &[(&str, &str)] = &[
    ("constant", "constant at {value:num}"),
    ("uniform_int", "a whole number uniformly distributed between {low:num} and {high:num}"),
    ("uniform_real", "uniformly distributed between {low:num} and {high:num}"),
    ("exponential", "exponentially distributed with mean {mean:num}"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotValue {
    Int(i128),
    Num(f64),
    Dist(DistributionSpec),
}

/// A sentence matched against one pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlledSentence {
    pub pattern_id: String,
    pub captures: BTreeMap<String, SlotValue>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SlotType {
    Int,
    Num,
    Dist,
}

#[derive(Debug, Clone, PartialEq)]
enum Element<'a> {
    Word(&'a str),
    Slot(&'a str, SlotType),
}

fn elements(template: &str) -> Vec<Element<'_>> {
    template
        .split_whitespace()
        .map(|w| match w.strip_prefix('{').and_then(|w| w.strip_suffix('}')) {
            Some(slot) => {
                let (name, ty) = slot.split_once(':').expect("slots are typed");
                let ty = match ty {
                    "int" => SlotType::Int,
                    "num" => SlotType::Num,
                    "dist" => SlotType::Dist,
                    other => panic!("unknown slot type {other}"),
                };
                Element::Slot(name, ty)
            }
            None => Element::Word(w),
        })
        .collect()
}

pub(crate) fn is_number(word: &str) -> bool {
    let digits = word.strip_prefix('-').unwrap_or(word);
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (digits, None),
    };
    !int.is_empty()
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
}

fn slot_value(word: &str, ty: SlotType) -> Option<SlotValue> {
    if !is_number(word) {
        return None;
    }
    match ty {
        SlotType::Int if !word.contains('.') => word.parse().ok().map(SlotValue::Int),
        SlotType::Num => word.parse().ok().map(SlotValue::Num),
        _ => None,
    }
}

fn num_of(v: &SlotValue) -> f64 {
    match v {
        SlotValue::Int(i) => *i as f64,
        SlotValue::Num(n) => *n,
        SlotValue::Dist(_) => f64::NAN,
    }
}

fn match_from(
    pattern: &[Element<'_>],
    words: &[&str],
    captures: &mut BTreeMap<String, SlotValue>,
) -> Option<usize> {
    // Returns the number of words consumed when the whole pattern matches a prefix.
    let Some((first, rest)) = pattern.split_first() else {
        return Some(0);
    };
    match first {
        Element::Word(w) => {
            if words.first() == Some(w) {
                match_from(rest, &words[1..], captures).map(|n| n + 1)
            } else {
                None
            }
        }
        Element::Slot(name, SlotType::Dist) => {
            for (kind, phrase) in DISTRIBUTION_PHRASES {
                let sub = elements(phrase);
                let mut inner = BTreeMap::new();
                if let Some(used) = match_from(&sub, words, &mut inner) {
                    let mut outer = captures.clone();
                    if let Some(n) = match_from(rest, &words[used..], &mut outer) {
                        let params: Vec<f64> = match *kind {
                            "constant" => vec![num_of(&inner["value"])],
                            "exponential" => vec![num_of(&inner["mean"])],
                            _ => vec![num_of(&inner["low"]), num_of(&inner["high"])],
                        };
                        let kind = crate::ir::DistributionKind::parse(kind).expect("table kinds are valid");
                        outer.insert(name.to_string(), SlotValue::Dist(DistributionSpec { kind, params }));
                        *captures = outer;
                        return Some(used + n);
                    }
                }
            }
            None
        }
        Element::Slot(name, ty) => {
            let value = slot_value(words.first()?, *ty)?;
            let n = match_from(rest, &words[1..], captures)?;
            captures.insert(name.to_string(), value);
            Some(n + 1)
        }
    }
}

/// Match normalised words against one pattern; the whole sentence must be consumed.
pub fn match_pattern(pattern: &Pattern, words: &[&str]) -> Option<ControlledSentence> {
    let mut captures = BTreeMap::new();
    let used = match_from(&elements(pattern.template), words, &mut captures)?;
    (used == words.len()).then(|| ControlledSentence { pattern_id: pattern.id.to_string(), captures })
}

pub fn find_pattern(id: &str) -> Option<&'static Pattern> {
    PATTERNS.iter().find(|p| p.id == id)
}

/// Pattern whose template text is closest to the sentence (normalised Levenshtein).
pub fn nearest_pattern(sentence: &str) -> &'static Pattern {
    PATTERNS
        .iter()
        .map(|p| (strsim::normalized_levenshtein(sentence, p.template), p))
        .fold(None::<(f64, &Pattern)>, |best, (score, p)| match best {
            Some((s, _)) if s >= score => best,
            _ => Some((score, p)),
        })
        .map(|(_, p)| p)
        .expect("pattern table is non-empty")
}
