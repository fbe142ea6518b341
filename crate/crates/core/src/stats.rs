//! Summary statistics computed from recorded series.

use std::collections::BTreeMap;

use crate::ir::SystemKind;
use crate::num::Real;
use crate::run::RunResult;

/// Time average of a right-continuous step function given by its change points,
/// over `[first x, last x]`. `None` for an empty or zero-length span.
pub fn step_time_average<T: Real>(points: &[(T, T)]) -> Option<T> {
    let (first, last) = (points.first()?, points.last()?);
    let span = last.0 - first.0;
    if span <= T::zero() {
        return None;
    }
    let area = points
        .windows(2)
        .fold(T::zero(), |acc, w| acc + w[0].1 * (w[1].0 - w[0].0));
    Some(area / span)
}

pub fn mean<T: Real>(values: impl IntoIterator<Item = T>) -> Option<T> {
    let (sum, n) = values
        .into_iter()
        .fold((T::zero(), 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / T::from_count(n))
}

/// Long-run averages of a single-server queue trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueStats<T> {
    /// Time-average number in system (L).
    pub time_avg_in_system: Option<T>,
    pub mean_wait: Option<T>,
    /// Mean time in system (W).
    pub mean_sojourn: Option<T>,
    pub utilization: Option<T>,
    /// Departures per unit of elapsed time.
    pub arrival_rate_eff: Option<T>,
    pub departures: Option<usize>,
    pub elapsed: Option<T>,
}

impl<T: Real> QueueStats<T> {
    pub fn from_series(
        system_size: Option<&[(T, T)]>,
        busy: Option<&[(T, T)]>,
        wait: Option<&[(T, T)]>,
        sojourn: Option<&[(T, T)]>,
    ) -> Self {
        let elapsed = system_size
            .or(busy)
            .and_then(|s| Some(s.last()?.0 - s.first()?.0))
            .filter(|e| *e > T::zero());
        let departures = sojourn.or(wait).map(<[_]>::len);
        let utilization = match busy {
            Some(b) => step_time_average(b),
            None => system_size.and_then(|s| {
                let indicator: Vec<(T, T)> = s
                    .iter()
                    .map(|&(x, n)| (x, if n >= T::one() { T::one() } else { T::zero() }))
                    .collect();
                step_time_average(&indicator)
            }),
        };
        Self {
            time_avg_in_system: system_size.and_then(step_time_average),
            mean_wait: wait.and_then(|w| mean(w.iter().map(|p| p.1))),
            mean_sojourn: sojourn.and_then(|s| mean(s.iter().map(|p| p.1))),
            utilization,
            arrival_rate_eff: match (departures, elapsed) {
                (Some(d), Some(e)) => Some(T::from_count(d) / e),
                _ => None,
            },
            departures,
            elapsed,
        }
    }
}

/// Inventory run totals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InventoryStats<T> {
    pub mean_on_hand: Option<T>,
    pub total_demand: Option<T>,
    pub total_fulfilled: Option<T>,
    pub total_lost: Option<T>,
    pub fill_rate: Option<T>,
}

impl<T: Real> InventoryStats<T> {
    /// `on_hand` is expected to start with its day-0 point, which is excluded from the mean.
    pub fn from_series(
        on_hand: Option<&[(T, T)]>,
        demand: Option<&[(T, T)]>,
        fulfilled: Option<&[(T, T)]>,
        lost: Option<&[(T, T)]>,
    ) -> Self {
        let total = |s: Option<&[(T, T)]>| s.map(|s| s.iter().fold(T::zero(), |a, p| a + p.1));
        let total_demand = total(demand);
        let total_fulfilled = total(fulfilled);
        let fill_rate = match (total_fulfilled, total_demand) {
            (Some(f), Some(d)) if d > T::zero() => Some(f / d),
            (Some(_), Some(_)) => Some(T::one()),
            _ => None,
        };
        Self {
            mean_on_hand: on_hand.and_then(|s| mean(s.iter().skip(1).map(|p| p.1))),
            total_demand,
            total_fulfilled,
            total_lost: total(lost),
            fill_rate,
        }
    }
}

/// Summary map attached to a [`RunResult`]; keys whose inputs were not recorded are absent.
pub fn summarize(kind: SystemKind, result: &RunResult) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let mut put = |k: &str, v: Option<f64>| {
        if let Some(v) = v {
            out.insert(k.to_string(), v);
        }
    };
    match kind {
        SystemKind::Queue => {
            let s = QueueStats::from_series(
                result.series("system_size"),
                result.series("busy"),
                result.series("wait"),
                result.series("sojourn"),
            );
            put("time_avg_in_system", s.time_avg_in_system);
            put("mean_wait", s.mean_wait);
            put("mean_sojourn", s.mean_sojourn);
            put("utilization", s.utilization);
            put("arrival_rate_eff", s.arrival_rate_eff);
            put("departures", s.departures.map(|d| d as f64));
            put("elapsed", s.elapsed);
        }
        SystemKind::Inventory => {
            let s = InventoryStats::from_series(
                result.series("on_hand"),
                result.series("demand"),
                result.series("fulfilled"),
                result.series("lost"),
            );
            put("mean_on_hand", s.mean_on_hand);
            put("total_demand", s.total_demand);
            put("total_fulfilled", s.total_fulfilled);
            put("total_lost", s.total_lost);
            put("fill_rate", s.fill_rate);
            put("orders", Some(result.events_named("order").count() as f64));
            put("replenishments", Some(result.events_named("replenishment").count() as f64));
        }
    }
    out
}
