//! Post-hoc interpretation of fitted surrogates.
//!
//! ARD length-scales map to sensitivities through `importance_d
//! proportional to 1/l_d`: a short length-scale means the objective moves
//! quickly along that dimension. One-hot blocks of a categorical parameter
//! are summed into a single importance before normalization, so every
//! search-space parameter appears exactly once and the weights sum to one.

pub mod plot;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bo::Study;
use crate::gp::{GpModel, KernelFamily};
use crate::space::{ParamKind, SearchSpace};
pub use plot::{emit_plot, filter_outliers, PlotSeries};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("surrogate is degenerate (constant targets); more trials are needed before importances are meaningful")]
    DegenerateModel,
    #[error("study has no fitted `{0}` surrogate")]
    MissingSurrogate(String),
    #[error("plot series has no data")]
    EmptySeries,
    #[error("plot series contains a non-finite value")]
    NonFiniteData,
    #[error("failed to write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Normalized per-parameter sensitivities for one objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    /// `loss` for scalarized studies, `energy`/`time` for multi-objective.
    pub objective_label: String,
    pub kernel_family: KernelFamily,
    /// One `(parameter, weight)` per search-space parameter, in space
    /// order; weights are non-negative and sum to one.
    pub weights: Vec<(String, f64)>,
}

/// Sums inverse length-scales over each parameter's encoded block and
/// normalizes to total one. `scales` follows the space's encoded layout.
pub fn importance_from_length_scales(scales: &[f64], space: &SearchSpace) -> Vec<(String, f64)> {
    debug_assert_eq!(scales.len(), space.dim());
    let mut raw = Vec::with_capacity(space.params.len());
    let mut offset = 0;
    for p in &space.params {
        let width = match &p.kind {
            ParamKind::Categorical { options } => options.len(),
            _ => 1,
        };
        let score: f64 = scales[offset..offset + width].iter().map(|l| 1.0 / l).sum();
        raw.push((p.name.clone(), score));
        offset += width;
    }
    let total: f64 = raw.iter().map(|(_, s)| s).sum();
    for (_, s) in &mut raw {
        *s /= total;
    }
    raw
}

/// Inverse-length-scale importance of a fitted model over `space`.
pub fn sensitivity_importance(
    model: &GpModel,
    space: &SearchSpace,
) -> Result<ImportanceReport, AnalysisError> {
    if model.degenerate {
        return Err(AnalysisError::DegenerateModel);
    }
    Ok(ImportanceReport {
        objective_label: "loss".to_string(),
        kernel_family: model.kernel.family,
        weights: importance_from_length_scales(&model.kernel.length_scales, space),
    })
}

fn report_from_study(
    study: &Study,
    space: &SearchSpace,
    label: &str,
) -> Result<ImportanceReport, AnalysisError> {
    let snapshot = study
        .gp_history
        .iter()
        .rev()
        .find(|s| s.objective_label == label)
        .ok_or_else(|| AnalysisError::MissingSurrogate(label.to_string()))?;
    if snapshot.degenerate {
        return Err(AnalysisError::DegenerateModel);
    }
    let scales: Vec<f64> = snapshot.length_scales.iter().map(|(_, l)| *l).collect();
    Ok(ImportanceReport {
        objective_label: label.to_string(),
        kernel_family: snapshot.family,
        weights: importance_from_length_scales(&scales, space),
    })
}

/// Importance of the final scalarized surrogate of a study.
pub fn study_importance(
    study: &Study,
    space: &SearchSpace,
) -> Result<ImportanceReport, AnalysisError> {
    report_from_study(study, space, "loss")
}

/// Per-objective importances of a multi-objective study, labeled
/// `energy` and `time`.
pub fn moo_importance(
    study: &Study,
    space: &SearchSpace,
) -> Result<(ImportanceReport, ImportanceReport), AnalysisError> {
    Ok((
        report_from_study(study, space, "energy")?,
        report_from_study(study, space, "time")?,
    ))
}
