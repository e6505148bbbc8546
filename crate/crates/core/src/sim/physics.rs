//! Closed-form latency and energy model.
//!
//! Voltage scales linearly with frequency, `V = (f - b_f) / k_V`. A core
//! draws switching power `alpha * C * V^2 * f` while executing and leakage
//! power `V * I_leakage` whenever it is powered, busy or idle.

use super::{PowerConstants, SimError};

/// Operating voltage required for frequency `f`.
pub fn voltage_from_frequency(f: f64, constants: &PowerConstants) -> Result<f64, SimError> {
    if f < constants.b_f {
        return Err(SimError::FrequencyBelowIntercept { f, b_f: constants.b_f });
    }
    Ok((f - constants.b_f) / constants.k_v)
}

/// Switching power drawn while a core executes at frequency `f`.
pub fn dynamic_power(f: f64, constants: &PowerConstants) -> Result<f64, SimError> {
    let v = voltage_from_frequency(f, constants)?;
    Ok(constants.activity * constants.capacitance * v * v * f)
}

/// Leakage power drawn by a powered core at frequency `f`, busy or idle.
pub fn leakage_power(f: f64, constants: &PowerConstants) -> Result<f64, SimError> {
    let v = voltage_from_frequency(f, constants)?;
    Ok(v * constants.leakage_current)
}

/// Time to run `n_ic` instructions uninterrupted at frequency `f`.
pub fn execution_time(n_ic: u64, constants: &PowerConstants, f: f64) -> Result<f64, SimError> {
    if f <= 0.0 {
        return Err(SimError::NonPositiveFrequency(f));
    }
    Ok(n_ic as f64 / (constants.ipc * f))
}

/// Energy to run `n_ic` instructions uninterrupted at frequency `f`:
/// total power times execution time. With `b_f = 0` this reduces to
/// `(alpha*C*f^2/k_V^2 + I_leakage/k_V) * n_ic/ipc`.
pub fn task_active_energy(n_ic: u64, f: f64, constants: &PowerConstants) -> Result<f64, SimError> {
    if f <= 0.0 {
        return Err(SimError::NonPositiveFrequency(f));
    }
    let power = dynamic_power(f, constants)? + leakage_power(f, constants)?;
    Ok(power * execution_time(n_ic, constants, f)?)
}

/// Leakage energy of a powered core over `duration` seconds.
pub fn idle_leakage_energy(
    f: f64,
    duration: f64,
    constants: &PowerConstants,
) -> Result<f64, SimError> {
    if duration < 0.0 {
        return Err(SimError::NegativeDuration(duration));
    }
    Ok(leakage_power(f, constants)? * duration)
}

/// Aggregation weight of priority level `p`: `1 / (p + 1)^2`.
///
/// Priorities are unsigned by construction, so the level-`0`-is-most
/// important convention needs no negative-input guard.
pub fn priority_weight(p: u32) -> f64 {
    let base = p as f64 + 1.0;
    1.0 / (base * base)
}

/// Priority-weighted sum of per-task latencies (not normalized).
pub fn aggregated_latency(items: &[(u32, f64)]) -> f64 {
    items.iter().map(|&(p, t)| priority_weight(p) * t).sum()
}
