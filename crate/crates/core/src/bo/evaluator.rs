//! Glue from design points to simulator runs.

use crate::sim::{
    run_simulation, PowerConstants, SchedulerPolicy, SimError, SystemConfig,
};
use crate::space::DesignPoint;
use crate::workload::TaskSet;

/// Builds a simulatable system from a decoded design point. Frequencies
/// arrive in GHz and the quantum in milliseconds (the space's units) and
/// are converted to SI here.
pub fn system_config_from_point(
    point: &DesignPoint,
    constants: PowerConstants,
) -> Result<SystemConfig, String> {
    let freq = |name: &str| {
        point
            .float(name)
            .map(|ghz| ghz * 1e9)
            .ok_or_else(|| format!("point is missing `{name}`"))
    };
    let count = |name: &str| {
        point
            .int(name)
            .and_then(|v| usize::try_from(v).ok())
            .ok_or_else(|| format!("point is missing `{name}`"))
    };
    let policy = match point.cat("scheduler") {
        Some("FCFS") => SchedulerPolicy::fcfs(),
        Some(kind @ ("RR" | "Priority")) => {
            let quantum = point
                .float("quantum_ms")
                .map(|ms| ms * 1e-3)
                .ok_or_else(|| format!("`{kind}` scheduling requires `quantum_ms`"))?;
            if kind == "RR" {
                SchedulerPolicy::round_robin(quantum)
            } else {
                SchedulerPolicy::priority(quantum)
            }
        }
        other => return Err(format!("unknown scheduler `{other:?}`")),
    };
    Ok(SystemConfig::from_class_counts(
        (count("count_little")?, freq("freq_little_ghz")?),
        (count("count_medium")?, freq("freq_medium_ghz")?),
        (count("count_big")?, freq("freq_big_ghz")?),
        policy,
        constants,
    ))
}

/// Evaluates design points by simulating a fixed task set; the objectives
/// are total energy (J) and priority-weighted aggregated latency (s).
///
/// The task set is fixed once per study so the objective is a
/// deterministic function of the design point.
#[derive(Debug, Clone)]
pub struct SimulationEvaluator {
    pub tasks: TaskSet,
    pub constants: PowerConstants,
}

impl SimulationEvaluator {
    pub fn new(tasks: TaskSet, constants: PowerConstants) -> Self {
        Self { tasks, constants }
    }

    pub fn evaluate(&self, point: &DesignPoint) -> Result<(f64, f64), String> {
        let config = system_config_from_point(point, self.constants)?;
        let (result, _) = run_simulation(&config, &self.tasks).map_err(|e: SimError| e.to_string())?;
        Ok((result.total_energy, result.aggregated_latency))
    }
}
