//! Experiment configuration: a TOML file in the paper's units (GHz, ms,
//! tasks per ms) resolved into SI-unit library types.
//!
//! Every field has a default, so an empty file runs the default scenario:
//! lambda = 1 task/ms, 500 tasks over a 1000 ms horizon, budget 100 with 10
//! Sobol warm-up trials, Matérn 5/2 kernel, balanced weights. Unknown keys
//! are rejected; validation reports every violation at once.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use schedtune::bo::{ObjectiveMode, ObjectiveSpec};
use schedtune::gp::KernelFamily;
use schedtune::sim::PowerConstants;
use schedtune::space::{default_space, ParamDef, SearchSpace};
use schedtune::workload::WorkloadSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// One BO study per seed at the default objective, plus the baseline.
    Single,
    /// One BO study per kernel family per seed; baseline once per seed.
    KernelComparison,
    /// One BO study per (beta, gamma) preference per seed, plus baselines.
    PreferenceSweep,
    /// One BO study per arrival rate per seed, plus baselines.
    LambdaSweep,
    /// EHVI multi-objective study per seed, plus baselines.
    Moo,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Single => "single",
            Scenario::KernelComparison => "kernel_comparison",
            Scenario::PreferenceSweep => "preference_sweep",
            Scenario::LambdaSweep => "lambda_sweep",
            Scenario::Moo => "moo",
        }
    }
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}
fn default_scenario() -> Scenario {
    Scenario::Single
}
fn default_budget() -> usize {
    100
}
fn default_n_init() -> usize {
    10
}
fn default_seeds() -> Vec<u64> {
    (1..=10).collect()
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}
fn default_kernel() -> String {
    "matern52".to_string()
}
fn default_kernels() -> Vec<String> {
    vec!["matern52".into(), "matern32".into(), "rbf".into()]
}
fn default_weights() -> Vec<[f64; 2]> {
    vec![[1.0, 1.0], [3.0, 1.0], [1.0, 3.0]]
}
fn default_lambdas() -> Vec<f64> {
    vec![0.5, 1.0, 2.5, 5.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadSection {
    /// Arrival rate in tasks per millisecond.
    pub lambda_per_ms: f64,
    pub max_tasks: usize,
    pub horizon_ms: f64,
    /// Least-important priority level K; levels are 0..=K.
    pub priority_levels: u32,
    pub instruction_range: [u64; 2],
}

impl Default for WorkloadSection {
    fn default() -> Self {
        Self {
            lambda_per_ms: 1.0,
            max_tasks: 500,
            horizon_ms: 1000.0,
            priority_levels: 3,
            instruction_range: [500_000, 5_000_000],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsSection {
    pub k_v_ghz_per_volt: f64,
    pub b_f_ghz: f64,
    pub capacitance_farad: f64,
    pub leakage_current_amp: f64,
    pub activity: f64,
    pub ipc: f64,
}

impl Default for ConstantsSection {
    fn default() -> Self {
        Self {
            k_v_ghz_per_volt: 5.0,
            b_f_ghz: 0.0,
            capacitance_farad: 1e-9,
            leakage_current_amp: 0.3,
            activity: 1.0,
            ipc: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveSection {
    pub beta: f64,
    pub gamma: f64,
    pub penalty: f64,
}

impl Default for ObjectiveSection {
    fn default() -> Self {
        Self { beta: 1.0, gamma: 1.0, penalty: 1e6 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub params: Vec<ParamDef>,
}

/// The raw on-disk schema; units follow the paper (GHz, ms, tasks/ms).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    #[serde(default = "default_scenario")]
    pub scenario: Scenario,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_n_init")]
    pub n_init: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Kernel for single/preference/lambda/moo scenarios.
    #[serde(default = "default_kernel")]
    pub kernel: String,
    /// Kernels compared by the kernel_comparison scenario.
    #[serde(default = "default_kernels")]
    pub kernels: Vec<String>,
    /// `(beta, gamma)` pairs for the preference sweep.
    #[serde(default = "default_weights")]
    pub weights: Vec<[f64; 2]>,
    /// Arrival rates (tasks per ms) for the lambda sweep.
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub workload: WorkloadSection,
    #[serde(default)]
    pub constants: ConstantsSection,
    #[serde(default)]
    pub objective: ObjectiveSection,
    /// Optional replacement of the default search space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSection>,
}

impl Default for RawConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config is the default")
    }
}

/// Fully resolved configuration in SI units.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub workload: WorkloadSpec,
    pub constants: PowerConstants,
    pub space: SearchSpace,
    pub objective: ObjectiveSpec,
    pub kernel: KernelFamily,
    pub kernels: Vec<KernelFamily>,
    pub weights: Vec<(f64, f64)>,
    /// Arrival rates in tasks per second.
    pub lambdas: Vec<f64>,
    pub budget: usize,
    pub n_init: usize,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    /// The raw file contents, kept for the manifest snapshot.
    pub raw: RawConfig,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    load_config_str(&text)
}

pub fn load_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    resolve(raw)
}

pub fn resolve(raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let mut violations = Vec::new();

    if raw.schema_version != SCHEMA_VERSION {
        violations.push(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            raw.schema_version
        ));
    }
    if raw.n_init == 0 || raw.budget < raw.n_init {
        violations.push(format!(
            "budget ({}) and n_init ({}) must satisfy budget >= n_init >= 1",
            raw.budget, raw.n_init
        ));
    }
    if raw.seeds.is_empty() {
        violations.push("seeds must not be empty".into());
    }
    let w = &raw.workload;
    if !(w.lambda_per_ms > 0.0) {
        violations.push(format!("workload.lambda_per_ms must be positive, got {}", w.lambda_per_ms));
    }
    if w.horizon_ms < 0.0 {
        violations.push(format!("workload.horizon_ms must be non-negative, got {}", w.horizon_ms));
    }
    if w.instruction_range[0] < 1 || w.instruction_range[1] < w.instruction_range[0] {
        violations.push(format!(
            "workload.instruction_range {:?} must satisfy 1 <= lo <= hi",
            w.instruction_range
        ));
    }
    let c = &raw.constants;
    if !(c.k_v_ghz_per_volt > 0.0) {
        violations.push(format!("constants.k_v_ghz_per_volt must be positive, got {}", c.k_v_ghz_per_volt));
    }
    if !(c.capacitance_farad > 0.0) {
        violations.push(format!("constants.capacitance_farad must be positive, got {}", c.capacitance_farad));
    }
    if c.leakage_current_amp < 0.0 {
        violations.push(format!("constants.leakage_current_amp must be non-negative, got {}", c.leakage_current_amp));
    }
    if !(0.0..=1.0).contains(&c.activity) {
        violations.push(format!("constants.activity must lie in [0, 1], got {}", c.activity));
    }
    if !(c.ipc > 0.0) {
        violations.push(format!("constants.ipc must be positive, got {}", c.ipc));
    }
    let o = &raw.objective;
    if o.beta < 0.0 || o.gamma < 0.0 || (o.beta == 0.0 && o.gamma == 0.0) {
        violations.push(format!(
            "objective weights must be non-negative and not both zero, got beta={} gamma={}",
            o.beta, o.gamma
        ));
    }
    if !o.penalty.is_finite() {
        violations.push(format!("objective.penalty must be finite, got {}", o.penalty));
    }

    let kernel = raw.kernel.parse::<KernelFamily>();
    if let Err(e) = &kernel {
        violations.push(format!("kernel: {e}"));
    }
    let mut kernels = Vec::new();
    if raw.scenario == Scenario::KernelComparison && raw.kernels.is_empty() {
        violations.push("kernel_comparison needs a non-empty `kernels` list".into());
    }
    for k in &raw.kernels {
        match k.parse::<KernelFamily>() {
            Ok(f) => kernels.push(f),
            Err(e) => violations.push(format!("kernels: {e}")),
        }
    }
    if raw.scenario == Scenario::PreferenceSweep {
        if raw.weights.is_empty() {
            violations.push("preference_sweep needs a non-empty `weights` list".into());
        }
        for &[beta, gamma] in &raw.weights {
            if beta < 0.0 || gamma < 0.0 || (beta == 0.0 && gamma == 0.0) {
                violations.push(format!("weights entry [{beta}, {gamma}] is invalid"));
            }
        }
    }
    if raw.scenario == Scenario::LambdaSweep {
        if raw.lambdas.is_empty() {
            violations.push("lambda_sweep needs a non-empty `lambdas` list".into());
        }
        for &l in &raw.lambdas {
            if !(l > 0.0) {
                violations.push(format!("lambdas entry {l} must be positive"));
            }
        }
    }

    let space = match &raw.space {
        None => Ok(default_space()),
        Some(section) => SearchSpace::new(section.params.clone()),
    };
    let space = match space {
        Ok(s) => Some(s),
        Err(e) => {
            violations.push(format!("space: {e}"));
            None
        }
    };

    if !violations.is_empty() {
        return Err(ConfigError::Validation(violations));
    }

    let mode = if raw.scenario == Scenario::Moo {
        ObjectiveMode::MultiObjective
    } else {
        ObjectiveMode::Scalarized
    };
    Ok(ExperimentConfig {
        scenario: raw.scenario,
        workload: WorkloadSpec {
            arrival_rate: w.lambda_per_ms * 1e3,
            max_tasks: w.max_tasks,
            horizon: w.horizon_ms * 1e-3,
            priority_levels: w.priority_levels,
            instruction_range: (w.instruction_range[0], w.instruction_range[1]),
            seed: 0, // replaced by each run's seed
        },
        constants: PowerConstants {
            k_v: c.k_v_ghz_per_volt * 1e9,
            b_f: c.b_f_ghz * 1e9,
            capacitance: c.capacitance_farad,
            leakage_current: c.leakage_current_amp,
            activity: c.activity,
            ipc: c.ipc,
        },
        space: space.expect("validated"),
        objective: ObjectiveSpec { mode, beta: o.beta, gamma: o.gamma, penalty: o.penalty },
        kernel: kernel.expect("validated"),
        kernels,
        weights: raw.weights.iter().map(|&[b, g]| (b, g)).collect(),
        lambdas: raw.lambdas.iter().map(|l| l * 1e3).collect(),
        budget: raw.budget,
        n_init: raw.n_init,
        seeds: raw.seeds.clone(),
        out_dir: raw.out_dir.clone(),
        raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_paper_defaults() {
        let cfg = load_config_str("").unwrap();
        assert_eq!(cfg.scenario, Scenario::Single);
        assert_eq!(cfg.workload.arrival_rate, 1000.0); // 1 task/ms
        assert_eq!(cfg.workload.max_tasks, 500);
        assert_eq!(cfg.workload.horizon, 1.0); // 1000 ms
        assert_eq!(cfg.budget, 100);
        assert_eq!(cfg.n_init, 10);
        assert_eq!(cfg.kernel, KernelFamily::Matern52);
        assert_eq!(cfg.constants.k_v, 5e9);
        assert_eq!(cfg.constants.capacitance, 1e-9);
        assert_eq!(cfg.constants.leakage_current, 0.3);
        assert_eq!(cfg.objective.beta, 1.0);
        assert_eq!(cfg.seeds.len(), 10);
        assert_eq!(cfg.space.params.len(), 8);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = load_config_str("frequnecy = 3.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("frequnecy"), "{msg}");
    }

    #[test]
    fn validation_lists_all_violations() {
        let err = load_config_str(
            "budget = 5\nn_init = 10\nseeds = []\n\n[workload]\nlambda_per_ms = -1.0\n",
        )
        .unwrap_err();
        let ConfigError::Validation(violations) = err else {
            panic!("expected validation error, got {err}")
        };
        assert!(violations.len() >= 3, "{violations:?}");
        assert!(violations.iter().any(|v| v.contains("budget")));
        assert!(violations.iter().any(|v| v.contains("seeds")));
        assert!(violations.iter().any(|v| v.contains("lambda_per_ms")));
    }

    #[test]
    fn units_convert_to_si() {
        let cfg = load_config_str(
            "[workload]\nlambda_per_ms = 2.5\nhorizon_ms = 400.0\n\n[constants]\nk_v_ghz_per_volt = 4.0\nb_f_ghz = 0.1\n",
        )
        .unwrap();
        assert_eq!(cfg.workload.arrival_rate, 2500.0);
        assert_eq!(cfg.workload.horizon, 0.4);
        assert_eq!(cfg.constants.k_v, 4e9);
        assert_eq!(cfg.constants.b_f, 1e8);
    }

    #[test]
    fn moo_scenario_switches_objective_mode() {
        let cfg = load_config_str("scenario = \"moo\"\n").unwrap();
        assert_eq!(cfg.objective.mode, ObjectiveMode::MultiObjective);
    }

    #[test]
    fn space_override_is_loaded() {
        let cfg = load_config_str(
            r#"
[[space.params]]
name = "freq_little_ghz"
type = "continuous"
lo = 0.6
hi = 1.2

[[space.params]]
name = "count_little"
type = "integer"
lo = 1
hi = 2

[[space.params]]
name = "scheduler"
type = "categorical"
options = ["FCFS", "RR"]

[[space.params]]
name = "quantum_ms"
type = "continuous"
lo = 1.0
hi = 2.0
conditional_on = ["scheduler", ["RR"]]
"#,
        )
        .unwrap();
        assert_eq!(cfg.space.params.len(), 4);
        assert_eq!(
            cfg.space.param("quantum_ms").unwrap().conditional_on,
            Some(("scheduler".into(), vec!["RR".into()]))
        );
    }

    #[test]
    fn bad_kernel_is_reported() {
        let err = load_config_str("kernel = \"matern99\"\n").unwrap_err();
        assert!(err.to_string().contains("matern99"));
    }

    #[test]
    fn unsupported_schema_version() {
        let err = load_config_str("schema_version = 2\n").unwrap_err();
        assert!(err.to_string().contains("schema_version"));
    }
}
