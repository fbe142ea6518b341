//! Core of the simforge pipeline: turn a description of a logistics system into a
//! validated, reproducible simulation.
//!
//! * [`ir`]: the simulation spec and its canonical text form
//! * [`frontend`]: controlled-English parser producing specs
//! * [`script`]: SimScript, the sandboxed language generated simulations are written in
//! * [`engines`]: reference inventory and queue simulators
//! * [`codegen`]: spec to SimScript compiler and completion artifact detection
//! * [`validation`]: static and dynamic checks, analytical oracles

pub mod codegen;
pub mod engines;
pub mod frontend;
pub mod ir;
pub mod num;
pub mod rng;
pub mod run;
pub mod script;
pub mod stats;
pub mod testkit;
pub mod validation;

pub use ir::{SimulationSpec, SystemKind};
pub use run::RunResult;

pub type QueueStats = stats::QueueStats<f64>;
pub type InventoryStats = stats::InventoryStats<f64>;
pub type Mm1 = validation::Mm1Metrics<f64>;
