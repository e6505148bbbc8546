//! Scenario execution: builds the run list for a configuration, executes
//! runs (optionally in parallel), writes per-run artifacts, and assembles
//! the manifest.
//!
//! Per-run outputs under `<out_dir>/<run_id>/`:
//! - `study.json`: config snapshot plus the full trial history.
//! - `trials.csv`: one row per trial.
//! - `importance.json`: normalized sensitivity report(s) (BO runs).
//! - plot SVGs with CSV sidecars (history, and for multi-objective runs the
//!   Pareto scatter and hypervolume trace; for scalarized BO runs the
//!   importance bars and a posterior-mean contour).
//!
//! `summary.csv`, `summary.txt`, and `manifest.json` land in `<out_dir>`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use schedtune::analysis::{
    emit_plot, filter_outliers, moo_importance, sensitivity_importance, study_importance,
    ImportanceReport, PlotSeries,
};
use schedtune::bo::{
    random_search, run_study, ObjectiveMode, ObjectiveSpec, Study, Trial,
    SimulationEvaluator,
};
use schedtune::gp::{fit_gp, KernelFamily};
use schedtune::sim::PowerConstants;
use schedtune::space::{encode, ParamKind, SearchSpace};
use schedtune::workload::{generate_tasks, WorkloadSpec};

use crate::config::{ExperimentConfig, RawConfig, Scenario};
use crate::summary::{print_summary, summary_csv};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot create {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bo,
    Random,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Bo => "bo",
            Algorithm::Random => "random",
        }
    }
}

/// One planned study execution.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub id: String,
    pub variant: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub objective: ObjectiveSpec,
    pub workload: WorkloadSpec,
    pub kernel: Option<KernelFamily>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "state", content = "reason")]
pub enum RunStatus {
    Ok,
    Failed(String),
}

/// Outcome of one run as recorded in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub id: String,
    pub variant: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub status: RunStatus,
    /// Best scalar loss, or final hypervolume for multi-objective runs.
    pub objective_value: Option<f64>,
    pub incumbent: Option<schedtune::space::DesignPoint>,
    pub duration_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

/// The scenario-level result: resolved config snapshot, tool version, and
/// every run with its output paths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario: Scenario,
    pub config: RawConfig,
    pub runs: Vec<RunRecord>,
    pub summary_csv: PathBuf,
    pub summary_txt: PathBuf,
}

impl RunManifest {
    pub fn any_failed(&self) -> bool {
        self.runs.iter().any(|r| r.status != RunStatus::Ok)
    }
}

/// Everything written for one study run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyDocument {
    pub schema_version: u32,
    pub id: String,
    pub variant: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub workload: WorkloadSpec,
    pub constants: PowerConstants,
    pub space: SearchSpace,
    pub study: Study,
    /// Final sensitivity report(s); empty for random search or while the
    /// surrogate is degenerate.
    pub importance: Vec<ImportanceReport>,
}

/// Expands the configured scenario into the ordered run list. Every
/// scenario pairs its BO studies with random-search baselines on the same
/// seeds; variants that share the evaluation context (kernel comparison)
/// share one baseline per seed.
pub fn build_runs(cfg: &ExperimentConfig) -> Vec<RunSpec> {
    let mut runs = Vec::new();
    let mut push = |variant: &str, algorithm: Algorithm, seed: u64, objective: ObjectiveSpec,
                    workload: WorkloadSpec, kernel: Option<KernelFamily>| {
        runs.push(RunSpec {
            id: format!("{variant}_{}_seed{seed}", algorithm.as_str()),
            variant: variant.to_string(),
            algorithm,
            seed,
            objective,
            workload,
            kernel,
        });
    };

    match cfg.scenario {
        Scenario::Single => {
            for &seed in &cfg.seeds {
                push("default", Algorithm::Bo, seed, cfg.objective, cfg.workload.clone(), Some(cfg.kernel));
            }
            for &seed in &cfg.seeds {
                push("default", Algorithm::Random, seed, cfg.objective, cfg.workload.clone(), None);
            }
        }
        Scenario::KernelComparison => {
            for &family in &cfg.kernels {
                for &seed in &cfg.seeds {
                    push(
                        &family.to_string(),
                        Algorithm::Bo,
                        seed,
                        cfg.objective,
                        cfg.workload.clone(),
                        Some(family),
                    );
                }
            }
            // All kernels share the objective and workload, so one baseline
            // per seed serves the whole comparison.
            for &seed in &cfg.seeds {
                push("baseline", Algorithm::Random, seed, cfg.objective, cfg.workload.clone(), None);
            }
        }
        Scenario::PreferenceSweep => {
            for &(beta, gamma) in &cfg.weights {
                let variant = format!("beta{beta}_gamma{gamma}");
                let objective = ObjectiveSpec { beta, gamma, ..cfg.objective };
                for &seed in &cfg.seeds {
                    push(&variant, Algorithm::Bo, seed, objective, cfg.workload.clone(), Some(cfg.kernel));
                }
                for &seed in &cfg.seeds {
                    push(&variant, Algorithm::Random, seed, objective, cfg.workload.clone(), None);
                }
            }
        }
        Scenario::LambdaSweep => {
            for &rate in &cfg.lambdas {
                let variant = format!("lambda{}", rate / 1e3);
                let workload = WorkloadSpec { arrival_rate: rate, ..cfg.workload.clone() };
                for &seed in &cfg.seeds {
                    push(&variant, Algorithm::Bo, seed, cfg.objective, workload.clone(), Some(cfg.kernel));
                }
                for &seed in &cfg.seeds {
                    push(&variant, Algorithm::Random, seed, cfg.objective, workload.clone(), None);
                }
            }
        }
        Scenario::Moo => {
            for &seed in &cfg.seeds {
                push("ehvi", Algorithm::Bo, seed, cfg.objective, cfg.workload.clone(), Some(cfg.kernel));
            }
            for &seed in &cfg.seeds {
                push("baseline", Algorithm::Random, seed, cfg.objective, cfg.workload.clone(), None);
            }
        }
    }
    runs
}

/// Runs the whole scenario with up to `jobs` parallel runs and writes all
/// artifacts under `cfg.out_dir`.
pub fn run_scenario(cfg: &ExperimentConfig, jobs: usize) -> Result<RunManifest, ScenarioError> {
    let specs = build_runs(cfg);
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|source| ScenarioError::Io { path: cfg.out_dir.clone(), source })?;
    log::info!(target: "Runner", "Scenario {} with {} runs, {} parallel.", cfg.scenario.as_str(), specs.len(), jobs.max(1));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let records: Vec<RunRecord> =
        pool.install(|| {
            use rayon::prelude::*;
            specs.par_iter().map(|spec| execute_run(cfg, spec)).collect()
        });

    let summary_csv_path = cfg.out_dir.join("summary.csv");
    let summary_txt_path = cfg.out_dir.join("summary.txt");
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: cfg.scenario,
        config: cfg.raw.clone(),
        runs: records,
        summary_csv: summary_csv_path.clone(),
        summary_txt: summary_txt_path.clone(),
    };
    write_text(&summary_csv_path, &summary_csv(&manifest))?;
    write_text(&summary_txt_path, &print_summary(&manifest))?;
    let manifest_path = cfg.out_dir.join("manifest.json");
    write_text(&manifest_path, &to_pretty_json(&manifest))?;
    log::info!(target: "Runner", "Manifest written to {}.", manifest_path.display());
    // The manifest file itself is not listed inside itself; callers get the
    // path from the return value.
    manifest.runs.iter().for_each(|r| {
        if let RunStatus::Failed(reason) = &r.status {
            log::warn!(target: "Runner", "Run {} failed: {reason}", r.id);
        }
    });
    Ok(manifest)
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn write_text(path: &Path, content: &str) -> Result<(), ScenarioError> {
    std::fs::write(path, content)
        .map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })
}

fn execute_run(cfg: &ExperimentConfig, spec: &RunSpec) -> RunRecord {
    let start = Instant::now();
    let mut record = RunRecord {
        id: spec.id.clone(),
        variant: spec.variant.clone(),
        algorithm: spec.algorithm,
        seed: spec.seed,
        status: RunStatus::Ok,
        objective_value: None,
        incumbent: None,
        duration_seconds: 0.0,
        outputs: Vec::new(),
    };
    match try_execute_run(cfg, spec, &mut record) {
        Ok(()) => {
            log::info!(target: "Runner", "Run {} finished in {:.2} s.", spec.id, start.elapsed().as_secs_f64());
        }
        Err(reason) => record.status = RunStatus::Failed(reason),
    }
    record.duration_seconds = start.elapsed().as_secs_f64();
    record
}

fn try_execute_run(
    cfg: &ExperimentConfig,
    spec: &RunSpec,
    record: &mut RunRecord,
) -> Result<(), String> {
    let tasks = generate_tasks(&spec.workload, spec.seed).map_err(|e| e.to_string())?;
    log::info!(target: "Task factory", "Created {} tasks.", tasks.len());
    let evaluator = SimulationEvaluator::new(tasks, cfg.constants);
    let study = match spec.algorithm {
        Algorithm::Bo => run_study(
            &cfg.space,
            spec.objective,
            spec.kernel.expect("BO runs carry a kernel"),
            cfg.budget,
            cfg.n_init,
            spec.seed,
            |p| evaluator.evaluate(p),
        ),
        Algorithm::Random => {
            random_search(&cfg.space, spec.objective, cfg.budget, spec.seed, |p| {
                evaluator.evaluate(p)
            })
        }
    }
    .map_err(|e| e.to_string())?;

    record.objective_value = match spec.objective.mode {
        ObjectiveMode::Scalarized => study.best_loss(),
        ObjectiveMode::MultiObjective => study.hv_trace.last().copied(),
    };
    record.incumbent = study.incumbent_trial().map(|t| t.point.clone());

    let reports: Vec<ImportanceReport> = if spec.algorithm == Algorithm::Bo {
        let computed = match spec.objective.mode {
            ObjectiveMode::Scalarized => study_importance(&study, &cfg.space).map(|r| vec![r]),
            ObjectiveMode::MultiObjective => moo_importance(&study, &cfg.space).map(|(e, t)| vec![e, t]),
        };
        match computed {
            Ok(r) => r,
            Err(err) => {
                log::warn!(target: "Runner", "Run {}: no importance report ({err}).", spec.id);
                Vec::new()
            }
        }
    } else {
        Vec::new()
    };

    let dir = cfg.out_dir.join(&spec.id);
    std::fs::create_dir_all(&dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let mut emit = |path: PathBuf| record.outputs.push(path);

    let document = StudyDocument {
        schema_version: 1,
        id: spec.id.clone(),
        variant: spec.variant.clone(),
        algorithm: spec.algorithm,
        seed: spec.seed,
        workload: spec.workload.clone(),
        constants: cfg.constants,
        space: cfg.space.clone(),
        study: study.clone(),
        importance: reports.clone(),
    };
    let study_path = dir.join("study.json");
    std::fs::write(&study_path, to_pretty_json(&document)).map_err(|e| e.to_string())?;
    emit(study_path);

    let trials_path = dir.join("trials.csv");
    std::fs::write(&trials_path, study.trials_csv(&cfg.space)).map_err(|e| e.to_string())?;
    emit(trials_path);

    match spec.objective.mode {
        ObjectiveMode::Scalarized => {
            let losses: Vec<f64> = study.trials.iter().filter_map(Trial::scalar_loss).collect();
            let series = PlotSeries::History {
                title: format!("{} optimization history", spec.id),
                ylabel: "loss".into(),
                values: losses,
                minimize: true,
            };
            let (svg, csv) = emit_plot(&series, &dir.join("history")).map_err(|e| e.to_string())?;
            emit(svg);
            emit(csv);
        }
        ObjectiveMode::MultiObjective => {
            let pairs: Vec<[f64; 2]> =
                study.trials.iter().filter_map(Trial::objective_pair).collect();
            let filtered = filter_outliers(&pairs, spec.objective.penalty);
            if !filtered.is_empty() {
                let series = PlotSeries::Pareto {
                    title: format!("{} objective scatter", spec.id),
                    xlabel: "ln energy (J)".into(),
                    ylabel: "ln latency (s)".into(),
                    points: filtered,
                };
                let (svg, csv) =
                    emit_plot(&series, &dir.join("pareto")).map_err(|e| e.to_string())?;
                emit(svg);
                emit(csv);
            }
            let series = PlotSeries::History {
                title: format!("{} hypervolume trace", spec.id),
                ylabel: "hypervolume".into(),
                values: study.hv_trace.clone(),
                minimize: false,
            };
            let (svg, csv) = emit_plot(&series, &dir.join("hv_trace")).map_err(|e| e.to_string())?;
            emit(svg);
            emit(csv);
        }
    }

    if spec.algorithm == Algorithm::Bo {
        if !reports.is_empty() {
            let path = dir.join("importance.json");
            std::fs::write(&path, to_pretty_json(&reports)).map_err(|e| e.to_string())?;
            emit(path);
            let series = PlotSeries::Importance {
                title: format!("{} parameter importance", spec.id),
                reports: reports.clone(),
            };
            let (svg, csv) =
                emit_plot(&series, &dir.join("importance")).map_err(|e| e.to_string())?;
            emit(svg);
            emit(csv);
        }
        if spec.objective.mode == ObjectiveMode::Scalarized {
            if let Some(series) = contour_series(&study, &cfg.space, &spec.id) {
                let (svg, csv) =
                    emit_plot(&series, &dir.join("contour")).map_err(|e| e.to_string())?;
                emit(svg);
                emit(csv);
            }
        }
    }
    Ok(())
}

/// Posterior-mean surface over the two most important non-categorical
/// parameters, the rest pinned at the incumbent's encoding.
fn contour_series(study: &Study, space: &SearchSpace, id: &str) -> Option<PlotSeries> {
    const GRID: usize = 50;
    let kernel = study.kernel_family?;
    let incumbent = study.incumbent_trial()?;
    let base = encode(&incumbent.point, space).ok()?;

    let n = study.trials.len();
    let d = space.dim();
    let mut x = ndarray::Array2::zeros((n, d));
    for (i, t) in study.trials.iter().enumerate() {
        let coords = encode(&t.point, space).ok()?;
        for (j, c) in coords.into_iter().enumerate() {
            x[[i, j]] = c;
        }
    }
    let y = ndarray::Array1::from_iter(study.trials.iter().filter_map(Trial::scalar_loss));
    if y.len() != n {
        return None;
    }
    let model = fit_gp(&x, &y, kernel, study.seed).ok()?;
    let report = sensitivity_importance(&model, space).ok()?;

    // Two most important parameters with a numeric axis.
    let mut ranked: Vec<(&String, f64)> =
        report.weights.iter().map(|(n, w)| (n, *w)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
    let mut chosen = Vec::new();
    for (name, _) in ranked {
        let p = space.param(name)?;
        if !matches!(p.kind, ParamKind::Categorical { .. }) {
            chosen.push(name.clone());
            if chosen.len() == 2 {
                break;
            }
        }
    }
    let [xname, yname] = <[String; 2]>::try_from(chosen).ok()?;

    let offset_of = |target: &str| -> usize {
        let mut offset = 0;
        for p in &space.params {
            if p.name == target {
                return offset;
            }
            offset += match &p.kind {
                ParamKind::Categorical { options } => options.len(),
                _ => 1,
            };
        }
        unreachable!("parameter comes from this space")
    };
    let axis_values = |name: &str| -> Vec<f64> {
        let p = space.param(name).expect("chosen from space");
        (0..GRID)
            .map(|i| {
                let u = i as f64 / (GRID - 1) as f64;
                match &p.kind {
                    ParamKind::Continuous { lo, hi } => lo + u * (hi - lo),
                    ParamKind::Integer { lo, hi } => *lo as f64 + u * (hi - lo) as f64,
                    ParamKind::Categorical { .. } => unreachable!(),
                }
            })
            .collect()
    };

    let (xo, yo) = (offset_of(&xname), offset_of(&yname));
    let mut values = Vec::with_capacity(GRID * GRID);
    for yi in 0..GRID {
        for xi in 0..GRID {
            let mut q = base.clone();
            q[xo] = xi as f64 / (GRID - 1) as f64;
            q[yo] = yi as f64 / (GRID - 1) as f64;
            values.push(model.predict(&q).ok()?.mean);
        }
    }
    Some(PlotSeries::Contour {
        title: format!("{id} posterior mean"),
        xlabel: xname.clone(),
        ylabel: yname.clone(),
        xs: axis_values(&xname),
        ys: axis_values(&yname),
        values,
    })
}
