use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::ir::{QueueParams, SimulationSpec, StopRule};
use crate::rng::SimRng;
use crate::run::RunResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueueEventKind {
    Arrival,
    Departure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueEvent {
    pub kind: QueueEventKind,
    pub time: f64,
    /// 1-based, in arrival order.
    pub customer_id: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueueRun {
    pub log: Vec<QueueEvent>,
    /// Per departed customer, in departure order: (customer id, wait in queue, sojourn).
    pub departures: Vec<(u64, f64, f64)>,
    /// `(time, customers in system, server busy)` after each event, starting at `(0, 0, false)`.
    pub system_size: Vec<(f64, u64, bool)>,
    pub end_time: f64,
    pub draws: u64,
}

/// Event-driven single-server FIFO queue.
///
/// Two clocks are kept: the next arrival and, while the server is busy, the next
/// departure. A departure wins ties. Random draws happen in this order: the first
/// interarrival at time zero; on each arrival the next interarrival (unless the
/// customer bound has been reached) and then, if the server was idle, the arriving
/// customer's service time; on each departure the service time of the next waiting
/// customer, if any.
///
/// With `StopRule::Customers(n)` arrivals stop after the n-th and the run ends at the
/// n-th departure. With `StopRule::Time(t)` no event later than `t` is processed and
/// the run ends at `t`.
pub fn simulate_queue(params: &QueueParams, seed: u64) -> QueueRun {
    let mut rng = SimRng::new(seed);
    let customer_limit = match params.stop {
        StopRule::Customers(n) => Some(n),
        StopRule::Time(_) => None,
    };
    let time_limit = match params.stop {
        StopRule::Time(t) => Some(t),
        StopRule::Customers(_) => None,
    };

    let mut clock = 0.0;
    let mut next_arrival = rng.sample(&params.interarrival);
    let mut arrivals_open = true;
    let mut next_departure = 0.0;
    let mut busy = false;
    let mut in_system = 0u64;
    let mut arrival_times: Vec<f64> = Vec::new();
    let mut service_starts: Vec<f64> = Vec::new();
    let mut log = Vec::new();
    let mut departures = Vec::new();
    let mut system_size = vec![(0.0, 0, false)];

    loop {
        if customer_limit.is_some_and(|n| departures.len() as u64 >= n) {
            break;
        }
        let departure_next = busy && (!arrivals_open || next_departure <= next_arrival);
        if !departure_next && !arrivals_open {
            break;
        }
        let event_time = if departure_next { next_departure } else { next_arrival };
        if time_limit.is_some_and(|t| event_time > t) {
            break;
        }
        clock = event_time;
        if departure_next {
            let idx = departures.len();
            let id = idx as u64 + 1;
            in_system -= 1;
            departures.push((id, service_starts[idx] - arrival_times[idx], clock - arrival_times[idx]));
            log.push(QueueEvent { kind: QueueEventKind::Departure, time: clock, customer_id: id });
            if in_system > 0 {
                service_starts.push(clock);
                next_departure = clock + rng.sample(&params.service);
            } else {
                busy = false;
            }
        } else {
            in_system += 1;
            arrival_times.push(clock);
            let id = arrival_times.len() as u64;
            log.push(QueueEvent { kind: QueueEventKind::Arrival, time: clock, customer_id: id });
            if customer_limit.is_some_and(|n| id >= n) {
                arrivals_open = false;
            } else {
                next_arrival = clock + rng.sample(&params.interarrival);
            }
            if !busy {
                busy = true;
                service_starts.push(clock);
                next_departure = clock + rng.sample(&params.service);
            }
        }
        system_size.push((clock, in_system, busy));
    }
    let end_time = match time_limit {
        Some(t) => {
            system_size.push((t, in_system, busy));
            t
        }
        None => clock,
    };
    QueueRun { log, departures, system_size, end_time, draws: rng.draws() }
}

/// Run the queue engine, recording `system_size` and `busy` as step series over time,
/// `wait` and `sojourn` per departed customer (x = customer id), and `arrival` /
/// `departure` events.
pub fn run_queue(params: &QueueParams, seed: u64) -> Result<RunResult, EngineError> {
    super::ensure_valid(&SimulationSpec::queue(params.clone(), seed))?;
    let run = simulate_queue(params, seed);
    let mut result = RunResult::new(seed);
    for &(t, n, busy) in &run.system_size {
        result.push_point("system_size", t, n as f64);
        result.push_point("busy", t, if busy { 1.0 } else { 0.0 });
    }
    for &(id, wait, sojourn) in &run.departures {
        result.push_point("wait", id as f64, wait);
        result.push_point("sojourn", id as f64, sojourn);
    }
    for ev in &run.log {
        let name = match ev.kind {
            QueueEventKind::Arrival => "arrival",
            QueueEventKind::Departure => "departure",
        };
        result.push_event(name, ev.time);
    }
    Ok(result)
}
