//! Seeded generators of valid specs, shared by the property suites and the
//! acceptance runner.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ir::{
    Discipline, DistributionSpec, InventoryParams, QueueParams, SimulationSpec, StopRule, SystemKind,
};

/// The worked inventory example: init 100, s 30, Q 50, L 2, constant demand 10, 10 days.
pub fn example_inventory() -> SimulationSpec {
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

/// Exponential single-server queue with the given means.
pub fn mm1_queue(interarrival_mean: f64, service_mean: f64, stop: StopRule, seed: u64) -> SimulationSpec {
    SimulationSpec::queue(
        QueueParams {
            interarrival: DistributionSpec::exponential(interarrival_mean),
            service: DistributionSpec::exponential(service_mean),
            servers: 1,
            discipline: Discipline::Fifo,
            stop,
        },
        seed,
    )
}

fn demand<R: Rng>(rng: &mut R) -> DistributionSpec {
    match rng.random_range(0..4) {
        0 => DistributionSpec::constant(if rng.random_bool(0.5) {
            rng.random_range(0..30) as f64
        } else {
            rng.random_range(0.0..30.0)
        }),
        1 => {
            let low = rng.random_range(0..20);
            DistributionSpec::uniform_int(low as f64, (low + rng.random_range(0..30)) as f64)
        }
        2 => {
            let low = rng.random_range(0.0..20.0);
            DistributionSpec::uniform_real(low, low + rng.random_range(0.0..30.0))
        }
        _ => DistributionSpec::exponential(rng.random_range(0.5..30.0)),
    }
}

/// A non-negative duration distribution with a positive mean.
fn duration<R: Rng>(rng: &mut R) -> DistributionSpec {
    match rng.random_range(0..4) {
        0 => DistributionSpec::constant(rng.random_range(0.1..5.0)),
        1 => {
            let low = rng.random_range(0..3);
            DistributionSpec::uniform_int(low as f64, (low + rng.random_range(1..5)) as f64)
        }
        2 => {
            let low = rng.random_range(0.0..3.0);
            DistributionSpec::uniform_real(low, low + rng.random_range(0.01..5.0))
        }
        _ => DistributionSpec::exponential(rng.random_range(0.1..5.0)),
    }
}

/// Label text exercising spaces, punctuation and non-ASCII; it uses one quote style
/// at most, never both.
fn label<R: Rng>(rng: &mut R) -> String {
    const PIECES: &[&str] = &["time", "days", " ", "units", "on hand", ".", "=", ",", "é", "λ", "(min)", "-", "#", "x1"];
    let quote = if rng.random_bool(0.5) { "'" } else { "\"" };
    let n = rng.random_range(0..5);
    (0..n)
        .map(|_| if rng.random_bool(0.1) { quote } else { PIECES[rng.random_range(0..PIECES.len())] })
        .collect()
}

pub fn random_spec<R: Rng>(rng: &mut R) -> SimulationSpec {
    let mut spec = if rng.random_bool(0.5) {
        SimulationSpec::inventory(
            InventoryParams {
                initial_inventory: rng.random_range(0..=500),
                reorder_point: rng.random_range(-5..=200),
                order_quantity: rng.random_range(1..=300),
                lead_time: rng.random_range(0..=10),
                demand: demand(rng),
                horizon: rng.random_range(1..=400),
            },
            rng.random(),
        )
    } else {
        let stop = if rng.random_bool(0.5) {
            StopRule::Customers(rng.random_range(1..=500))
        } else {
            StopRule::Time(rng.random_range(0.5..500.0))
        };
        SimulationSpec::queue(
            QueueParams {
                interarrival: duration(rng),
                service: duration(rng),
                servers: 1,
                discipline: Discipline::Fifo,
                stop,
            },
            rng.random(),
        )
    };
    let out = &mut spec.output;
    if rng.random_bool(0.5) {
        let mut series = out.series.clone();
        series.shuffle(rng);
        series.truncate(rng.random_range(1..=series.len()));
        out.series = series;
    }
    if rng.random_bool(0.5) {
        out.xlabel = label(rng);
    }
    if rng.random_bool(0.5) {
        out.ylabel = label(rng);
    }
    out.grid = rng.random_bool(0.5);
    out.legend = rng.random_bool(0.5);
    out.replenishment_markers = spec.kind == SystemKind::Inventory && rng.random_bool(0.5);
    spec
}

/// `n` specs from a fixed seed.
pub fn random_specs(seed: u64, n: usize) -> Vec<SimulationSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_spec(&mut rng)).collect()
}
