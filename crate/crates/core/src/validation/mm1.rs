//! Closed-form M/M/1 steady state, the oracle for exponential single-server queues.

use thiserror::Error;

use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mm1Metrics<T> {
    /// Server utilisation λ/μ.
    pub rho: T,
    /// Mean number in system.
    pub l: T,
    /// Mean time in system.
    pub w: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum Mm1Error {
    #[error("unstable queue: rho = {rho} >= 1")]
    Unstable { rho: f64 },
    #[error("rates must be positive and finite")]
    NonPositiveRate,
}

pub fn analytical_mm1<T: Real>(arrival_rate: T, service_rate: T) -> Result<Mm1Metrics<T>, Mm1Error> {
    let ok = |r: T| r.is_finite() && r > T::zero();
    if !ok(arrival_rate) || !ok(service_rate) {
        return Err(Mm1Error::NonPositiveRate);
    }
    let rho = arrival_rate / service_rate;
    if rho >= T::one() {
        return Err(Mm1Error::Unstable { rho: rho.to_f64().unwrap_or(f64::INFINITY) });
    }
    Ok(Mm1Metrics { rho, l: rho / (T::one() - rho), w: T::one() / (service_rate - arrival_rate) })
}
