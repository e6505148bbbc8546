//! Summary rendering: a fixed-width per-variant table (best configuration
//! found, one row per variant and algorithm) and a per-run CSV.

use schedtune::space::DesignPoint;

use crate::config::Scenario;
use crate::scenario::{Algorithm, RunManifest, RunRecord, RunStatus};

fn class_cell(point: &DesignPoint, count_name: &str, freq_name: &str) -> String {
    match (point.int(count_name), point.float(freq_name)) {
        (Some(0), _) => "-".to_string(),
        (Some(c), Some(f)) => format!("{c} x {f:.2}"),
        _ => "-".to_string(),
    }
}

fn scheduler_cell(point: &DesignPoint) -> String {
    match point.cat("scheduler") {
        Some("FCFS") => "FCFS".to_string(),
        Some(kind) => match point.float("quantum_ms") {
            Some(q) => format!("{kind} ({q:.2} ms)"),
            None => kind.to_string(),
        },
        None => "-".to_string(),
    }
}

fn cells(record: &RunRecord) -> [String; 4] {
    match &record.incumbent {
        Some(p) => [
            class_cell(p, "count_little", "freq_little_ghz"),
            class_cell(p, "count_medium", "freq_medium_ghz"),
            class_cell(p, "count_big", "freq_big_ghz"),
            scheduler_cell(p),
        ],
        None => ["-".into(), "-".into(), "-".into(), "-".into()],
    }
}

/// Best run per `(variant, algorithm)` group, in first-appearance order.
/// Scalarized objectives pick the minimum, hypervolumes the maximum.
fn best_per_group(manifest: &RunManifest) -> Vec<&RunRecord> {
    let maximize = manifest.scenario == Scenario::Moo;
    let mut groups: Vec<(String, Algorithm, &RunRecord)> = Vec::new();
    for record in manifest.runs.iter().filter(|r| r.status == RunStatus::Ok) {
        let Some(value) = record.objective_value else { continue };
        match groups
            .iter_mut()
            .find(|(v, a, _)| *v == record.variant && *a == record.algorithm)
        {
            None => groups.push((record.variant.clone(), record.algorithm, record)),
            Some(entry) => {
                let current = entry.2.objective_value.expect("grouped records carry values");
                let better = if maximize { value > current } else { value < current };
                if better {
                    entry.2 = record;
                }
            }
        }
    }
    groups.into_iter().map(|(_, _, r)| r).collect()
}

/// Fixed-width table in the shape of the comparison tables: variant, best
/// core configuration per class (`count x freq`, `-` for absent classes),
/// scheduler with quantum, and objective value. Deterministic bytes.
pub fn print_summary(manifest: &RunManifest) -> String {
    let mut out = format!("Scenario: {}\n", manifest.scenario.as_str());
    out.push_str(&format!(
        "{:<24} {:<10} {:<12} {:<12} {:<12} {:<20} {:>12}\n",
        "Variant", "Algorithm", "Little", "Medium", "Big", "Scheduler", "Objective"
    ));
    for record in best_per_group(manifest) {
        let [little, medium, big, scheduler] = cells(record);
        let objective = record
            .objective_value
            .map_or("-".to_string(), |v| format!("{v:.4}"));
        out.push_str(&format!(
            "{:<24} {:<10} {:<12} {:<12} {:<12} {:<20} {:>12}\n",
            record.variant,
            record.algorithm.as_str(),
            little,
            medium,
            big,
            scheduler,
            objective
        ));
    }
    out
}

/// One CSV row per run (not just the best per group).
pub fn summary_csv(manifest: &RunManifest) -> String {
    let mut out = String::from(
        "id,variant,algorithm,seed,status,objective_value,little,medium,big,scheduler\n",
    );
    for record in &manifest.runs {
        let [little, medium, big, scheduler] = cells(record);
        let status = match &record.status {
            RunStatus::Ok => "ok".to_string(),
            RunStatus::Failed(_) => "failed".to_string(),
        };
        let objective = record
            .objective_value
            .map_or(String::new(), |v| v.to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            record.id,
            record.variant,
            record.algorithm.as_str(),
            record.seed,
            status,
            objective,
            little,
            medium,
            big,
            scheduler.replace(',', ";"),
        ));
    }
    out
}
