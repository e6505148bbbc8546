//! Library surface of the experiment runner, used by the binary and the
//! acceptance suite.

pub mod config;
pub mod runlog;
pub mod scenario;
pub mod summary;

pub use config::{load_config, load_config_str, ExperimentConfig, Scenario};
pub use scenario::{build_runs, run_scenario, RunManifest, RunRecord, RunStatus, StudyDocument};
pub use summary::{print_summary, summary_csv};
