//! Compile a [`SimulationSpec`] to SimScript.
//!
//! Emitted programs have four labelled sections (`preamble`, `declarations`,
//! `simulation`, `output`), use the domain names from the spec for their variables,
//! and draw random numbers in exactly the order the reference engines do, so that
//! interpreting the program reproduces the engine trace point for point.

mod artifact;

use std::fmt::Write;

use thiserror::Error;

use crate::ir::{
    validate_spec, DistributionKind, DistributionSpec, InventoryParams, OutputSpec, QueueParams,
    SimulationSpec, StopRule, SystemKind, ValidationOutcome, Violation,
};
use crate::script::{number_literal, string_literal, SCRIPT_SENTINEL};

pub use artifact::{parse_llm_output, Artifact, ArtifactError, END_MARKER};

pub const SECTIONS: [&str; 4] = ["preamble", "declarations", "simulation", "output"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodegenError {
    #[error("spec kind {0} does not match its parameters")]
    UnsupportedKind(SystemKind),
    #[error("invalid spec: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

struct Emitter {
    out: String,
}

impl Emitter {
    fn line(&mut self, depth: usize, text: impl AsRef<str>) {
        let _ = writeln!(self.out, "{}{}", "    ".repeat(depth), text.as_ref());
    }

    fn section(&mut self, name: &str) {
        self.line(0, format!("# section: {name}"));
    }
}

fn num(v: f64) -> String {
    if v < 0.0 {
        format!("-{}", number_literal(-v))
    } else {
        number_literal(v)
    }
}

/// SimScript expression drawing one sample (constants draw nothing).
fn draw(dist: &DistributionSpec) -> String {
    let p = &dist.params;
    match dist.kind {
        DistributionKind::Constant => num(p[0]),
        DistributionKind::UniformInt => format!("rand_uniform_int({}, {})", num(p[0]), num(p[1])),
        DistributionKind::UniformReal => format!("rand_uniform({}, {})", num(p[0]), num(p[1])),
        DistributionKind::Exponential => format!("rand_exp({})", num(p[0])),
    }
}

fn describe(dist: &DistributionSpec) -> String {
    let params: Vec<String> = dist.params.iter().map(|v| num(*v)).collect();
    format!("{}({})", dist.kind.as_str(), params.join(", "))
}

pub fn emit(spec: &SimulationSpec) -> Result<String, CodegenError> {
    match (spec.kind, &spec.inventory, &spec.queue) {
        (SystemKind::Inventory, Some(_), None) | (SystemKind::Queue, None, Some(_)) => {}
        _ => return Err(CodegenError::UnsupportedKind(spec.kind)),
    }
    if let ValidationOutcome::Violations(v) = validate_spec(spec) {
        return Err(CodegenError::Invalid(v));
    }
    let mut e = Emitter { out: format!("{SCRIPT_SENTINEL}\n") };
    match spec.kind {
        SystemKind::Inventory => emit_inventory(&mut e, spec, spec.inventory.as_ref().expect("checked")),
        SystemKind::Queue => emit_queue(&mut e, spec, spec.queue.as_ref().expect("checked")),
    }
    emit_output(&mut e, &spec.output);
    Ok(e.out)
}

fn emit_preamble(e: &mut Emitter, spec: &SimulationSpec, summary: &[String]) {
    e.section("preamble");
    for line in summary {
        e.line(0, format!("# {line}"));
    }
    e.line(0, format!("# seed: {}", spec.seed));
    e.line(0, format!(
        "# replenishment markers: {}",
        if spec.output.replenishment_markers { "on" } else { "off" }
    ));
}

fn emit_output(e: &mut Emitter, output: &OutputSpec) {
    e.section("output");
    let flag = |b: bool| if b { "True" } else { "False" };
    e.line(0, format!(
        "plot_decl({}, {}, {}, {})",
        string_literal(&output.xlabel),
        string_literal(&output.ylabel),
        flag(output.grid),
        flag(output.legend)
    ));
}

fn emit_inventory(e: &mut Emitter, spec: &SimulationSpec, p: &InventoryParams) {
    let rec = |name: &str| spec.output.records(name);
    emit_preamble(e, spec, &[
        "single-product inventory control, (s, Q) policy, unmet demand is lost".into(),
        "each loop iteration is one day: draw demand, receive the due order, fulfill, review".into(),
        format!("demand per day: {}", describe(&p.demand)),
    ]);

    e.section("declarations");
    e.line(0, format!("initial_inventory = {}", p.initial_inventory));
    e.line(0, format!("reorder_point = {}", p.reorder_point));
    e.line(0, format!("order_quantity = {}", p.order_quantity));
    e.line(0, format!("lead_time = {}", p.lead_time));
    e.line(0, format!("horizon = {}", p.horizon));
    e.line(0, "inventory = initial_inventory");
    e.line(0, "order_outstanding = False");
    e.line(0, "order_arrival_day = 0");
    for v in ["demand", "received", "fulfilled", "lost"] {
        e.line(0, format!("{v} = 0"));
    }
    if rec("on_hand") {
        e.line(0, "record('on_hand', 0, inventory)");
    }

    e.section("simulation");
    e.line(0, "for day in range(1, horizon + 1):");
    e.line(1, format!("demand = max(0, floor({}))", draw(&p.demand)));
    e.line(1, "received = 0");
    e.line(1, "if order_outstanding and order_arrival_day == day:");
    e.line(2, "inventory = inventory + order_quantity");
    e.line(2, "received = order_quantity");
    e.line(2, "order_outstanding = False");
    e.line(2, "mark_event('replenishment', day)");
    e.line(1, "fulfilled = min(demand, inventory)");
    e.line(1, "lost = demand - fulfilled");
    e.line(1, "inventory = inventory - fulfilled");
    e.line(1, "if not order_outstanding and inventory <= reorder_point:");
    e.line(2, "mark_event('order', day)");
    if p.lead_time == 0 {
        e.line(2, "inventory = inventory + order_quantity");
        e.line(2, "received = received + order_quantity");
        e.line(2, "mark_event('replenishment', day)");
    } else {
        e.line(2, "order_outstanding = True");
        e.line(2, "order_arrival_day = day + lead_time");
    }
    for (series, var) in [
        ("on_hand", "inventory"),
        ("demand", "demand"),
        ("received", "received"),
        ("fulfilled", "fulfilled"),
        ("lost", "lost"),
    ] {
        if rec(series) {
            e.line(1, format!("record('{series}', day, {var})"));
        }
    }
}

fn emit_queue(e: &mut Emitter, spec: &SimulationSpec, q: &QueueParams) {
    let rec = |name: &str| spec.output.records(name);
    let stop = match q.stop {
        StopRule::Customers(n) => format!("stop after {n} departures"),
        StopRule::Time(t) => format!("stop at time {}", num(t)),
    };
    emit_preamble(e, spec, &[
        "single-server FIFO queue, discrete-event simulation".into(),
        "the loop advances to whichever of the next arrival and next departure comes first".into(),
        format!("interarrival: {}, service: {}, {stop}", describe(&q.interarrival), describe(&q.service)),
    ]);

    e.section("declarations");
    match q.stop {
        StopRule::Customers(n) => e.line(0, format!("customer_limit = {n}")),
        StopRule::Time(t) => e.line(0, format!("time_limit = {}", num(t))),
    }
    e.line(0, "clock = 0");
    e.line(0, format!("next_arrival = {}", draw(&q.interarrival)));
    e.line(0, "next_departure = 0");
    e.line(0, "arrivals_open = True");
    e.line(0, "server_busy = 0");
    e.line(0, "in_system = 0");
    e.line(0, "arrivals = 0");
    e.line(0, "departures = 0");
    e.line(0, "arrival_times = []");
    e.line(0, "service_starts = []");
    e.line(0, "departure_next = False");
    e.line(0, "event_time = 0");
    e.line(0, "running = True");
    let record_state = |e: &mut Emitter, depth: usize, at: &str| {
        if rec("system_size") {
            e.line(depth, format!("record('system_size', {at}, in_system)"));
        }
        if rec("busy") {
            e.line(depth, format!("record('busy', {at}, server_busy)"));
        }
    };
    record_state(e, 0, "0");

    e.section("simulation");
    e.line(0, "while running:");
    e.line(1, "departure_next = server_busy == 1 and (not arrivals_open or next_departure <= next_arrival)");
    e.line(1, "if departure_next:");
    e.line(2, "event_time = next_departure");
    e.line(1, "else:");
    e.line(2, "event_time = next_arrival");
    match q.stop {
        StopRule::Customers(_) => {
            e.line(1, "if departures >= customer_limit:");
            e.line(2, "running = False");
            e.line(1, "elif not departure_next and not arrivals_open:");
            e.line(2, "running = False");
        }
        StopRule::Time(_) => {
            e.line(1, "if not departure_next and not arrivals_open:");
            e.line(2, "running = False");
            e.line(1, "elif event_time > time_limit:");
            e.line(2, "running = False");
        }
    }
    e.line(1, "elif departure_next:");
    e.line(2, "clock = event_time");
    e.line(2, "in_system = in_system - 1");
    e.line(2, "wait = service_starts[departures] - arrival_times[departures]");
    e.line(2, "sojourn = clock - arrival_times[departures]");
    e.line(2, "departures = departures + 1");
    if rec("wait") {
        e.line(2, "record('wait', departures, wait)");
    }
    if rec("sojourn") {
        e.line(2, "record('sojourn', departures, sojourn)");
    }
    e.line(2, "mark_event('departure', clock)");
    e.line(2, "if in_system > 0:");
    e.line(3, "service_starts.append(clock)");
    e.line(3, format!("next_departure = clock + {}", draw(&q.service)));
    e.line(2, "else:");
    e.line(3, "server_busy = 0");
    record_state(e, 2, "clock");
    e.line(1, "else:");
    e.line(2, "clock = event_time");
    e.line(2, "in_system = in_system + 1");
    e.line(2, "arrival_times.append(clock)");
    e.line(2, "arrivals = arrivals + 1");
    e.line(2, "mark_event('arrival', clock)");
    match q.stop {
        StopRule::Customers(_) => {
            e.line(2, "if arrivals >= customer_limit:");
            e.line(3, "arrivals_open = False");
            e.line(2, "else:");
            e.line(3, format!("next_arrival = clock + {}", draw(&q.interarrival)));
        }
        StopRule::Time(_) => {
            e.line(2, format!("next_arrival = clock + {}", draw(&q.interarrival)));
        }
    }
    e.line(2, "if server_busy == 0:");
    e.line(3, "server_busy = 1");
    e.line(3, "service_starts.append(clock)");
    e.line(3, format!("next_departure = clock + {}", draw(&q.service)));
    record_state(e, 2, "clock");
    if matches!(q.stop, StopRule::Time(_)) {
        record_state(e, 0, "time_limit");
    }
}
