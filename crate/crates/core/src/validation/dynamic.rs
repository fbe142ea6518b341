use crate::ir::{InventoryParams, SimulationSpec, SystemKind};
use crate::run::RunResult;
use crate::stats::QueueStats;

use super::{Check, ValidationReport};

/// Little's law is only checked on runs at least this long.
pub const LITTLE_MIN_DEPARTURES: usize = 10_000;
/// Allowed |L − λ_eff·W| / L.
pub const LITTLE_TOLERANCE: f64 = 0.05;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn not_recorded(id: &str, needed: &[&str]) -> Check {
    Check::skip(id, format!("needs series {}", needed.join(", ")))
}

/// Trace invariants for a run produced from `spec`.
pub fn check_dynamic(result: &RunResult, spec: &SimulationSpec) -> ValidationReport {
    let checks = match (spec.kind, &spec.inventory) {
        (SystemKind::Inventory, Some(inv)) => inventory_checks(result, inv),
        (SystemKind::Queue, _) => queue_checks(result),
        (SystemKind::Inventory, None) => vec![Check::fail("spec.valid", "inventory spec without parameters")],
    };
    ValidationReport::new(checks)
}

fn ys(series: &[(f64, f64)]) -> Vec<f64> {
    series.iter().map(|p| p.1).collect()
}

fn inventory_checks(r: &RunResult, inv: &InventoryParams) -> Vec<Check> {
    let horizon = inv.horizon as usize;
    let q = inv.order_quantity as f64;
    let mut checks = Vec::new();

    // Every recorded series covers the horizon with days 1..=horizon (on_hand also day 0).
    let mut shape = Vec::new();
    for name in crate::ir::INVENTORY_SERIES {
        let Some(s) = r.series(name) else { continue };
        let first = if name == "on_hand" { 0 } else { 1 };
        let days: Vec<f64> = (first..=horizon).map(|d| d as f64).collect();
        let xs: Vec<f64> = s.iter().map(|p| p.0).collect();
        if xs != days {
            shape.push(format!("{name}: expected days {first}..={horizon}, got {} points", xs.len()));
        }
    }
    let shaped = shape.is_empty();
    checks.push(Check::from_problems("inventory.horizon", "one point per day", &shape));

    let values: Vec<(&str, f64)> = crate::ir::INVENTORY_SERIES
        .iter()
        .filter_map(|n| r.series(n).map(|s| (*n, s)))
        .flat_map(|(n, s)| s.iter().map(move |p| (n, p.1)))
        .collect();
    checks.push(if values.is_empty() {
        not_recorded("inventory.non_negative", &["any inventory series"])
    } else {
        let bad: Vec<String> = values
            .iter()
            .filter(|(_, v)| !(v.is_finite() && *v >= 0.0 && v.fract() == 0.0))
            .map(|(n, v)| format!("{n} has value {v}"))
            .collect();
        Check::from_problems("inventory.non_negative", "all quantities are non-negative whole units", &bad)
    });

    let on_hand = r.series("on_hand").map(ys);
    let received = r.series("received").map(ys);
    checks.push(match (&on_hand, &received, r.series("fulfilled").map(ys)) {
        (Some(oh), Some(rc), Some(ful)) if shaped => {
            let mut bad = Vec::new();
            if oh[0] != inv.initial_inventory as f64 {
                bad.push(format!("day 0 on hand {} != initial inventory {}", oh[0], inv.initial_inventory));
            }
            let demand = r.series("demand").map(ys);
            let lost = r.series("lost").map(ys);
            for d in 1..=horizon {
                let available = oh[d - 1] + rc[d - 1];
                if oh[d] != available - ful[d - 1] {
                    bad.push(format!(
                        "day {d}: on hand {} != {} + received {} - fulfilled {}",
                        oh[d], oh[d - 1], rc[d - 1], ful[d - 1]
                    ));
                }
                if let (Some(dem), Some(lost)) = (&demand, &lost) {
                    if dem[d - 1] != ful[d - 1] + lost[d - 1] {
                        bad.push(format!("day {d}: demand {} != fulfilled + lost", dem[d - 1]));
                    }
                    if lost[d - 1] > 0.0 && ful[d - 1] > oh[d - 1] + rc[d - 1] {
                        bad.push(format!("day {d}: sales lost while stock remained"));
                    }
                }
                if rc[d - 1] != 0.0 && rc[d - 1] != q {
                    bad.push(format!("day {d}: received {} is not the order quantity", rc[d - 1]));
                }
            }
            Check::from_problems("inventory.conservation", "on hand balances receipts and sales every day", &bad)
        }
        _ if !shaped => Check::skip("inventory.conservation", "series do not cover the horizon"),
        _ => not_recorded("inventory.conservation", &["on_hand", "received", "fulfilled"]),
    });

    let orders: Vec<f64> = r.events_named("order").collect();
    let receipts: Vec<f64> = r.events_named("replenishment").collect();
    let lead = inv.lead_time as f64;
    let mut bad = Vec::new();
    let expected: Vec<f64> = orders.iter().map(|o| o + lead).filter(|t| *t <= horizon as f64).collect();
    if expected != receipts {
        bad.push(format!("replenishments at {receipts:?}, expected {expected:?} from orders {orders:?}"));
    }
    for w in orders.windows(2) {
        if w[1] < w[0] + lead.max(1.0) {
            bad.push(format!("order on day {} placed while day-{} order outstanding", w[1], w[0]));
        }
    }
    if let (Some(oh), true) = (&on_hand, shaped) {
        for d in 1..=horizon {
            let day = d as f64;
            let ordered = orders.contains(&day);
            let outstanding = orders.iter().any(|&o| o < day && o + lead > day);
            let before_order = if ordered && inv.lead_time == 0 { oh[d] - q } else { oh[d] };
            let due = !outstanding && before_order <= inv.reorder_point as f64;
            if due != ordered {
                bad.push(format!(
                    "day {d}: position {before_order}, reorder point {}: order {}",
                    inv.reorder_point,
                    if ordered { "placed but not due" } else { "due but not placed" }
                ));
            }
        }
    }
    checks.push(
        Check::from_problems("inventory.order_timing", "orders follow the (s, Q) rule and arrive after the lead time", &bad)
            .with("orders", orders.len() as f64)
            .with("replenishments", receipts.len() as f64),
    );

    checks.push(match (&received, shaped) {
        (Some(rc), true) => {
            let bad: Vec<String> = (1..=horizon)
                .filter(|&d| (rc[d - 1] > 0.0) != receipts.contains(&(d as f64)))
                .map(|d| format!("day {d}: received {} but marker {}", rc[d - 1], receipts.contains(&(d as f64))))
                .collect();
            Check::from_problems("inventory.replenishment_markers", "a marker on exactly the receipt days", &bad)
        }
        _ => not_recorded("inventory.replenishment_markers", &["received"]),
    });
    checks
}

fn queue_checks(r: &RunResult) -> Vec<Check> {
    let mut checks = Vec::new();
    let arrivals: Vec<f64> = r.events_named("arrival").collect();
    let departures: Vec<f64> = r.events_named("departure").collect();

    checks.push(if arrivals.is_empty() && departures.is_empty() {
        Check::skip("queue.departures_le_arrivals", "no arrival/departure events recorded")
    } else {
        let mut bad = Vec::new();
        if departures.len() > arrivals.len() {
            bad.push(format!("{} departures but only {} arrivals", departures.len(), arrivals.len()));
        }
        for (k, (d, a)) in departures.iter().zip(&arrivals).enumerate() {
            if d < a {
                bad.push(format!("departure {} at {d} precedes arrival at {a}", k + 1));
            }
        }
        Check::from_problems("queue.departures_le_arrivals", "no customer leaves before arriving", &bad)
            .with("arrivals", arrivals.len() as f64)
            .with("departures", departures.len() as f64)
    });

    checks.push(match r.series("sojourn") {
        Some(sojourn) if !departures.is_empty() => {
            let mut bad = Vec::new();
            if sojourn.len() != departures.len() {
                bad.push(format!("{} sojourn records for {} departures", sojourn.len(), departures.len()));
            }
            let wait = r.series("wait");
            if wait.is_some_and(|w| w.len() != sojourn.len()) {
                bad.push("wait and sojourn record different customers".to_string());
            }
            for (k, &(id, soj)) in sojourn.iter().enumerate() {
                if id != (k + 1) as f64 {
                    bad.push(format!("departure {} is customer {id}", k + 1));
                    continue;
                }
                let (Some(&dep), Some(&arr)) = (departures.get(k), arrivals.get(k)) else { break };
                if !close(dep - soj, arr) {
                    bad.push(format!("customer {id}: departs {dep} after {soj} but arrived {arr}"));
                }
                if let Some(&(_, w)) = wait.and_then(|w| w.get(k)) {
                    let start = if k == 0 { arr } else { arr.max(departures[k - 1]) };
                    if !close(w, start - arr) || w < 0.0 || w > soj {
                        bad.push(format!("customer {id}: wait {w}, expected {}", start - arr));
                    }
                }
            }
            Check::from_problems("queue.fifo", "customers served in arrival order", &bad)
        }
        _ => Check::skip("queue.fifo", "needs series sojourn and departure events"),
    });

    checks.push(match (r.series("system_size"), r.series("busy")) {
        (Some(size), Some(busy)) => {
            let bad: Vec<String> = if size.len() != busy.len() || size.iter().zip(busy).any(|(a, b)| a.0 != b.0) {
                vec!["system_size and busy change at different times".to_string()]
            } else {
                size.iter()
                    .zip(busy)
                    .filter(|((_, n), (_, b))| (*n > 0.0) != (*b == 1.0) || (*b != 0.0 && *b != 1.0))
                    .map(|((t, n), (_, b))| format!("t={t}: {n} in system, busy={b}"))
                    .collect()
            };
            Check::from_problems("queue.busy_iff_nonempty", "server busy exactly when the system is nonempty", &bad)
        }
        _ => not_recorded("queue.busy_iff_nonempty", &["system_size", "busy"]),
    });

    checks.push(match r.series("system_size") {
        Some(size) if !arrivals.is_empty() => {
            let mut bad = Vec::new();
            let sorted = |v: &[f64]| {
                let mut v = v.to_vec();
                v.sort_by(f64::total_cmp);
                v
            };
            let (arr, dep) = (sorted(&arrivals), sorted(&departures));
            for (i, &(t, n)) in size.iter().enumerate() {
                // Only the last point at each instant reflects all events at that instant.
                if size.get(i + 1).is_some_and(|p| p.0 == t) {
                    continue;
                }
                let a = arr.partition_point(|&x| x <= t) as f64;
                let d = dep.partition_point(|&x| x <= t) as f64;
                if n != a - d || n < 0.0 {
                    bad.push(format!("t={t}: system size {n}, but {a} arrived and {d} left"));
                    if bad.len() > 20 {
                        break;
                    }
                }
            }
            Check::from_problems("queue.system_size", "system size equals arrivals minus departures", &bad)
        }
        _ => not_recorded("queue.system_size", &["system_size"]),
    });

    let stats = QueueStats::<f64>::from_series(r.series("system_size"), r.series("busy"), r.series("wait"), r.series("sojourn"));
    checks.push(match (stats.time_avg_in_system, stats.arrival_rate_eff, stats.mean_sojourn, stats.departures) {
        (Some(l), Some(lambda), Some(w), Some(n)) => {
            let check = if n < LITTLE_MIN_DEPARTURES {
                Check::skip("queue.littles_law", format!("{n} departures < {LITTLE_MIN_DEPARTURES}"))
            } else {
                let err = (l - lambda * w).abs() / l;
                let detail = format!("L = {l:.4}, lambda_eff * W = {:.4} ({:.2}% apart)", lambda * w, err * 100.0);
                if err <= LITTLE_TOLERANCE {
                    Check::pass("queue.littles_law", detail)
                } else {
                    Check::fail("queue.littles_law", detail)
                }
            };
            check.with("L", l).with("lambda_eff", lambda).with("W", w).with("departures", n as f64)
        }
        _ => not_recorded("queue.littles_law", &["system_size", "sojourn"]),
    });
    checks
}
