//! Simulation traces produced by the engines and the interpreter.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A declared plot, as produced by `plot_decl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotDecl {
    pub xlabel: String,
    pub ylabel: String,
    pub grid: bool,
    pub legend: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub name: String,
    pub x: f64,
}

/// Seeded, reproducible simulation trace.
///
/// Points inside each series are in non-decreasing `x` order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub series: BTreeMap<String, Vec<(f64, f64)>>,
    pub events: Vec<Event>,
    #[serde(default)]
    pub summary: BTreeMap<String, f64>,
    pub seed: u64,
    pub steps_used: u64,
    #[serde(default)]
    pub plot: Option<PlotDecl>,
}

impl RunResult {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn series(&self, name: &str) -> Option<&[(f64, f64)]> {
        self.series.get(name).map(Vec::as_slice)
    }

    pub fn push_point(&mut self, name: &str, x: f64, y: f64) {
        match self.series.get_mut(name) {
            Some(points) => points.push((x, y)),
            None => {
                self.series.insert(name.to_string(), vec![(x, y)]);
            }
        }
    }

    pub fn push_event(&mut self, name: &str, x: f64) {
        self.events.push(Event {
            name: name.to_string(),
            x,
        });
    }

    pub fn events_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = f64> + 'a {
        self.events.iter().filter(move |e| e.name == name).map(|e| e.x)
    }

    pub fn point_count(&self) -> usize {
        self.series.values().map(Vec::len).sum()
    }

    /// Same series names, point counts and values, and the same event log.
    /// Summary, step count and plot declaration are ignored.
    pub fn same_trace(&self, other: &RunResult) -> bool {
        self.series == other.series && self.events == other.events
    }
}
