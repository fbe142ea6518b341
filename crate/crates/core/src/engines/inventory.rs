use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::ir::{InventoryParams, OutputSpec, SimulationSpec};
use crate::rng::SimRng;
use crate::run::RunResult;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InventoryDayRecord {
    pub day: u64,
    pub demand: u64,
    pub received: u64,
    pub fulfilled: u64,
    pub lost: u64,
    pub on_hand_end: u64,
    pub order_placed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InventoryRun {
    pub days: Vec<InventoryDayRecord>,
    /// Days on which an order was received.
    pub replenishment_days: Vec<u64>,
    pub draws: u64,
}

/// Truncate a demand draw to a non-negative whole number of units.
pub(crate) fn demand_units(draw: f64) -> u64 {
    draw.floor().max(0.0) as u64
}

/// Day-by-day (s, Q) simulation with lost sales.
///
/// For each day `t = 1..=horizon`: draw demand, receive the order due on `t`, fulfill
/// `min(demand, on_hand)` and lose the rest, then at end of day place an order of
/// `order_quantity` if the inventory position is at or below the reorder point and no
/// order is outstanding. The order arrives on day `t + lead_time`; with a zero lead time
/// it is received immediately after being placed.
pub fn simulate_inventory(params: &InventoryParams, seed: u64) -> InventoryRun {
    let mut rng = SimRng::new(seed);
    let mut on_hand = params.initial_inventory;
    let mut due: Option<u64> = None;
    let mut days = Vec::with_capacity(params.horizon as usize);
    let mut replenishment_days = Vec::new();

    for day in 1..=params.horizon {
        let demand = demand_units(rng.sample(&params.demand));
        let mut received = 0;
        if due == Some(day) {
            on_hand += params.order_quantity;
            received = params.order_quantity;
            due = None;
            replenishment_days.push(day);
        }
        let fulfilled = demand.min(on_hand);
        let lost = demand - fulfilled;
        on_hand -= fulfilled;

        let outstanding = if due.is_some() { params.order_quantity } else { 0 };
        let position = (on_hand + outstanding) as i64;
        let order_placed = due.is_none() && position <= params.reorder_point;
        if order_placed {
            if params.lead_time == 0 {
                on_hand += params.order_quantity;
                received += params.order_quantity;
                replenishment_days.push(day);
            } else {
                due = Some(day + params.lead_time);
            }
        }
        days.push(InventoryDayRecord {
            day,
            demand,
            received,
            fulfilled,
            lost,
            on_hand_end: on_hand,
            order_placed,
        });
    }
    InventoryRun { days, replenishment_days, draws: rng.draws() }
}

/// Run the inventory engine and record every inventory series plus `order` and
/// `replenishment` events. `on_hand` starts with the day-0 point.
pub fn run_inventory(params: &InventoryParams, seed: u64) -> Result<RunResult, EngineError> {
    let spec = SimulationSpec {
        output: OutputSpec::default_for(crate::ir::SystemKind::Inventory),
        ..SimulationSpec::inventory(params.clone(), seed)
    };
    super::ensure_valid(&spec)?;
    let run = simulate_inventory(params, seed);
    let mut result = RunResult::new(seed);
    result.push_point("on_hand", 0.0, params.initial_inventory as f64);
    for rec in &run.days {
        let x = rec.day as f64;
        if rec.order_placed {
            // An immediate (zero lead time) receipt is logged after its order.
            if params.lead_time == 0 {
                result.push_event("order", x);
                result.push_event("replenishment", x);
            } else {
                if rec.received > 0 {
                    result.push_event("replenishment", x);
                }
                result.push_event("order", x);
            }
        } else if rec.received > 0 {
            result.push_event("replenishment", x);
        }
        result.push_point("on_hand", x, rec.on_hand_end as f64);
        result.push_point("demand", x, rec.demand as f64);
        result.push_point("received", x, rec.received as f64);
        result.push_point("fulfilled", x, rec.fulfilled as f64);
        result.push_point("lost", x, rec.lost as f64);
    }
    Ok(result)
}
