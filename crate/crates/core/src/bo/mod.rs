//! Bayesian-optimization loop over the design space, plus the
//! random-search baseline.
//!
//! Scalarized studies minimize `beta ln E + gamma ln T` with a GP surrogate
//! and log expected improvement; multi-objective studies model `ln E` and
//! `ln T` with two independent GPs and maximize exact 2-D expected
//! hypervolume improvement. Acquisition maximization is candidate-set
//! based: a fixed Sobol sweep, uniform draws, and Gaussian perturbations of
//! the incumbent's encoding. Failed or invalid evaluations are recorded
//! with a penalty loss and the study continues.

pub mod acquisition;
pub mod evaluator;
pub mod pareto;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gp::{fit_gp, GpError, GpModel, KernelFamily};
use crate::rng::{stream_rng, Stream};
use crate::space::{
    decode, encode, random_sample, sobol_sample, sobol::SobolSequence, DesignPoint, ParamValue,
    SearchSpace, SpaceError,
};
pub use acquisition::{ehvi, log_expected_improvement, LOG_EI_FLOOR};
pub use evaluator::{system_config_from_point, SimulationEvaluator};
pub use pareto::{dominates, hypervolume_2d, pareto_front, FrontMember, ParetoFront, ReferencePoint};

#[derive(Debug, Error, PartialEq)]
pub enum OptError {
    #[error("objective weights must be non-negative and not both zero; got beta={beta}, gamma={gamma}")]
    BadWeights { beta: f64, gamma: f64 },
    #[error("penalty must be finite, got {0}")]
    BadPenalty(f64),
    #[error("budget {budget} and n_init {n_init} must satisfy budget >= n_init >= 1")]
    BadBudget { budget: usize, n_init: usize },
    #[error("log cost needs positive objectives, got energy={energy}, latency={latency}")]
    NonPositiveObjective { energy: f64, latency: f64 },
    #[error("front member {point:?} does not dominate the reference point {reference:?}")]
    NotDominatingReference { point: [f64; 2], reference: [f64; 2] },
    #[error("need at least one completed trial")]
    NoTrials,
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Gp(#[from] GpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveMode {
    Scalarized,
    MultiObjective,
}

/// Loss definition: preference weights for the scalarized log cost, and the
/// finite loss substituted for invalid or failed evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub mode: ObjectiveMode,
    /// Weight on `ln(energy)`.
    pub beta: f64,
    /// Weight on `ln(latency)`.
    pub gamma: f64,
    pub penalty: f64,
}

impl Default for ObjectiveSpec {
    fn default() -> Self {
        Self { mode: ObjectiveMode::Scalarized, beta: 1.0, gamma: 1.0, penalty: 1e6 }
    }
}

impl ObjectiveSpec {
    pub fn scalarized(beta: f64, gamma: f64) -> Self {
        Self { mode: ObjectiveMode::Scalarized, beta, gamma, ..Self::default() }
    }

    pub fn multi_objective() -> Self {
        Self { mode: ObjectiveMode::MultiObjective, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), OptError> {
        if self.beta < 0.0 || self.gamma < 0.0 {
            return Err(OptError::BadWeights { beta: self.beta, gamma: self.gamma });
        }
        if self.mode == ObjectiveMode::Scalarized && self.beta == 0.0 && self.gamma == 0.0 {
            return Err(OptError::BadWeights { beta: self.beta, gamma: self.gamma });
        }
        if !self.penalty.is_finite() {
            return Err(OptError::BadPenalty(self.penalty));
        }
        Ok(())
    }
}

/// Weighted log-sum cost `beta ln(E) + gamma ln(T)`.
pub fn scalarized_cost(energy: f64, latency: f64, beta: f64, gamma: f64) -> Result<f64, OptError> {
    if !(energy > 0.0) || !(latency > 0.0) {
        return Err(OptError::NonPositiveObjective { energy, latency });
    }
    Ok(beta * energy.ln() + gamma * latency.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialSource {
    Sobol,
    Bo,
    Random,
}

/// Loss recorded for a trial: a scalar in scalarized mode, the log
/// objective pair in multi-objective mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrialLoss {
    Scalar(f64),
    Pair { ln_energy: f64, ln_latency: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub point: DesignPoint,
    /// Total energy in joules (zero when the evaluation failed).
    pub energy: f64,
    /// Aggregated latency in seconds (zero when the evaluation failed).
    pub latency: f64,
    pub loss: TrialLoss,
    pub source: TrialSource,
    pub penalized: bool,
}

impl Trial {
    pub fn scalar_loss(&self) -> Option<f64> {
        match self.loss {
            TrialLoss::Scalar(v) => Some(v),
            TrialLoss::Pair { .. } => None,
        }
    }

    pub fn objective_pair(&self) -> Option<[f64; 2]> {
        match self.loss {
            TrialLoss::Scalar(_) => None,
            TrialLoss::Pair { ln_energy, ln_latency } => Some([ln_energy, ln_latency]),
        }
    }
}

/// Hyperparameters of one fitted surrogate, kept per refit so the study
/// JSON carries the full calibration history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpSnapshot {
    /// Number of trials the model was fitted on.
    pub trial_index: usize,
    /// `loss` for scalarized studies, `energy`/`time` for multi-objective.
    pub objective_label: String,
    pub family: KernelFamily,
    pub degenerate: bool,
    pub signal_variance: f64,
    pub noise_variance: f64,
    /// Length-scale per encoded dimension, labeled by parameter (one-hot
    /// dimensions as `name=option`).
    pub length_scales: Vec<(String, f64)>,
}

impl GpSnapshot {
    fn from_model(model: &GpModel, label: &str, trial_index: usize, labels: &[String]) -> Self {
        Self {
            trial_index,
            objective_label: label.to_string(),
            family: model.kernel.family,
            degenerate: model.degenerate,
            signal_variance: model.kernel.signal_variance,
            noise_variance: model.kernel.noise_variance,
            length_scales: labels
                .iter()
                .cloned()
                .zip(model.kernel.length_scales.iter().copied())
                .collect(),
        }
    }
}

/// A complete optimization run: every trial in order plus the running
/// incumbent (scalarized) or Pareto front and hypervolume trace (MOO).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub objective: ObjectiveSpec,
    /// `None` for the random-search baseline.
    pub kernel_family: Option<KernelFamily>,
    pub budget: usize,
    pub n_init: usize,
    pub seed: u64,
    pub trials: Vec<Trial>,
    /// Index of the best scalarized trial.
    pub incumbent: Option<usize>,
    pub pareto: Option<ParetoFront>,
    pub reference_point: Option<ReferencePoint>,
    /// Hypervolume after each trial (multi-objective only).
    pub hv_trace: Vec<f64>,
    pub gp_history: Vec<GpSnapshot>,
}

impl Study {
    pub fn incumbent_trial(&self) -> Option<&Trial> {
        self.incumbent.map(|i| &self.trials[i])
    }

    pub fn best_loss(&self) -> Option<f64> {
        self.incumbent_trial().and_then(Trial::scalar_loss)
    }

    /// Running minimum of the scalar loss, one entry per trial.
    pub fn best_loss_trace(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.trials
            .iter()
            .filter_map(Trial::scalar_loss)
            .map(|l| {
                best = best.min(l);
                best
            })
            .collect()
    }

    /// CSV rendering with one row per trial; parameter columns follow the
    /// space order and suppressed parameters are left empty.
    pub fn trials_csv(&self, space: &SearchSpace) -> String {
        let mut header = String::from("index,source,penalized");
        for p in &space.params {
            header.push(',');
            header.push_str(&p.name);
        }
        header.push_str(",energy_j,latency_s,loss,ln_energy,ln_latency\n");
        let mut out = header;
        for t in &self.trials {
            let source = match t.source {
                TrialSource::Sobol => "sobol",
                TrialSource::Bo => "bo",
                TrialSource::Random => "random",
            };
            out.push_str(&format!("{},{},{}", t.index, source, t.penalized));
            for p in &space.params {
                out.push(',');
                match t.point.get(&p.name) {
                    Some(ParamValue::Float(v)) => out.push_str(&v.to_string()),
                    Some(ParamValue::Int(v)) => out.push_str(&v.to_string()),
                    Some(ParamValue::Cat(v)) => out.push_str(v),
                    None => {}
                }
            }
            out.push_str(&format!(",{},{}", t.energy, t.latency));
            match t.loss {
                TrialLoss::Scalar(v) => out.push_str(&format!(",{v},,")),
                TrialLoss::Pair { ln_energy, ln_latency } => {
                    out.push_str(&format!(",,{ln_energy},{ln_latency}"))
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Candidate-set sizes for acquisition maximization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProposalConfig {
    pub sobol_candidates: usize,
    pub uniform_candidates: usize,
    /// Gaussian perturbations of the incumbent's encoding.
    pub local_candidates: usize,
    pub local_sigma: f64,
}

impl Default for ProposalConfig {
    fn default() -> Self {
        Self { sobol_candidates: 1024, uniform_candidates: 512, local_candidates: 16, local_sigma: 0.05 }
    }
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; u1 = 0 is redrawn.
    loop {
        let u1: f64 = rng.random();
        if u1 > 0.0 {
            let u2: f64 = rng.random();
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}

fn candidate_vectors(
    space: &SearchSpace,
    cfg: &ProposalConfig,
    anchors: &[Vec<f64>],
    rng: &mut impl Rng,
) -> Result<Vec<Vec<f64>>, OptError> {
    let d = space.dim();
    let mut out = Vec::with_capacity(cfg.sobol_candidates + cfg.uniform_candidates + cfg.local_candidates);
    let mut seq = SobolSequence::new(d).ok_or(SpaceError::SobolDimension {
        needed: d,
        supported: crate::space::sobol::MAX_DIMENSION,
    })?;
    for _ in 0..cfg.sobol_candidates {
        out.push(seq.next_point());
    }
    for _ in 0..cfg.uniform_candidates {
        out.push((0..d).map(|_| rng.random()).collect());
    }
    if !anchors.is_empty() {
        for k in 0..cfg.local_candidates {
            let base = &anchors[k % anchors.len()];
            out.push(
                base.iter()
                    .map(|&b| (b + cfg.local_sigma * standard_normal(rng)).clamp(0.0, 1.0))
                    .collect(),
            );
        }
    }
    Ok(out)
}

fn encoded_trials(study: &Study, space: &SearchSpace) -> Result<Array2<f64>, OptError> {
    let n = study.trials.len();
    let d = space.dim();
    let mut x = Array2::zeros((n, d));
    for (i, t) in study.trials.iter().enumerate() {
        let coords = encode(&t.point, space)?;
        for (j, c) in coords.into_iter().enumerate() {
            x[[i, j]] = c;
        }
    }
    Ok(x)
}

struct Proposal {
    point: DesignPoint,
    fell_back: bool,
    snapshots: Vec<GpSnapshot>,
}

fn propose_internal(
    study: &Study,
    space: &SearchSpace,
    kernel_family: KernelFamily,
    objective: &ObjectiveSpec,
    cfg: &ProposalConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Proposal, OptError> {
    if study.trials.is_empty() {
        return Err(OptError::NoTrials);
    }
    let labels = space.encoded_labels();
    let x = encoded_trials(study, space)?;
    let n = study.trials.len();

    // Draw all seeds up front so the stream advances identically on the
    // fallback path.
    let fit_seed_a: u64 = rng.random();
    let fit_seed_b: u64 = rng.random();

    match objective.mode {
        ObjectiveMode::Scalarized => {
            let y = Array1::from_iter(study.trials.iter().map(|t| {
                t.scalar_loss().expect("scalarized study stores scalar losses")
            }));
            let model = match fit_gp(&x, &y, kernel_family, fit_seed_a) {
                Ok(m) => m,
                Err(e) => {
                    log::warn!(target: "Optimizer", "GP fit failed ({e}); falling back to a random sample");
                    return Ok(Proposal {
                        point: random_sample(space, rng),
                        fell_back: true,
                        snapshots: Vec::new(),
                    });
                }
            };
            let snapshot = GpSnapshot::from_model(&model, "loss", n, &labels);
            let best = study
                .best_loss()
                .expect("scalarized study with trials has an incumbent");
            let anchors: Vec<Vec<f64>> = study
                .incumbent_trial()
                .map(|t| encode(&t.point, space))
                .transpose()?
                .into_iter()
                .collect();
            let candidates = candidate_vectors(space, cfg, &anchors, rng)?;
            let mut best_idx = 0;
            let mut best_score = f64::NEG_INFINITY;
            for (i, c) in candidates.iter().enumerate() {
                let p = model.predict(c)?;
                let score = log_expected_improvement(p.mean, p.variance, best);
                if score > best_score {
                    best_score = score;
                    best_idx = i;
                }
            }
            Ok(Proposal {
                point: decode(&candidates[best_idx], space)?,
                fell_back: false,
                snapshots: vec![snapshot],
            })
        }
        ObjectiveMode::MultiObjective => {
            let pairs: Vec<[f64; 2]> = study
                .trials
                .iter()
                .map(|t| t.objective_pair().expect("MOO study stores objective pairs"))
                .collect();
            let y_e = Array1::from_iter(pairs.iter().map(|p| p[0]));
            let y_t = Array1::from_iter(pairs.iter().map(|p| p[1]));
            let models = fit_gp(&x, &y_e, kernel_family, fit_seed_a)
                .and_then(|me| fit_gp(&x, &y_t, kernel_family, fit_seed_b).map(|mt| (me, mt)));
            let (model_e, model_t) = match models {
                Ok(pair) => pair,
                Err(e) => {
                    log::warn!(target: "Optimizer", "GP fit failed ({e}); falling back to a random sample");
                    return Ok(Proposal {
                        point: random_sample(space, rng),
                        fell_back: true,
                        snapshots: Vec::new(),
                    });
                }
            };
            let snapshots = vec![
                GpSnapshot::from_model(&model_e, "energy", n, &labels),
                GpSnapshot::from_model(&model_t, "time", n, &labels),
            ];
            let reference = study
                .reference_point
                .expect("MOO study freezes the reference point during warm-up");
            let front = study
                .pareto
                .as_ref()
                .expect("MOO study maintains a front")
                .restricted_to(&reference);
            // Perturb around the front members, cycling through them.
            let mut anchors = Vec::with_capacity(front.len());
            for m in &front.members {
                anchors.push(encode(&study.trials[m.trial_index].point, space)?);
            }
            let candidates = candidate_vectors(space, cfg, &anchors, rng)?;
            let mut best_idx = 0;
            let mut best_score = f64::NEG_INFINITY;
            for (i, c) in candidates.iter().enumerate() {
                let pe = model_e.predict(c)?;
                let pt = model_t.predict(c)?;
                let score = ehvi(&pe, &pt, &front, &reference);
                if score > best_score {
                    best_score = score;
                    best_idx = i;
                }
            }
            Ok(Proposal {
                point: decode(&candidates[best_idx], space)?,
                fell_back: false,
                snapshots,
            })
        }
    }
}

/// Proposes the next design point by maximizing the acquisition over a
/// candidate set (default sizes). Falls back to a uniform random sample if
/// the surrogate cannot be fitted.
pub fn propose_next(
    study: &Study,
    space: &SearchSpace,
    kernel_family: KernelFamily,
    objective: &ObjectiveSpec,
    rng: &mut ChaCha8Rng,
) -> Result<DesignPoint, OptError> {
    propose_internal(study, space, kernel_family, objective, &ProposalConfig::default(), rng)
        .map(|p| p.point)
}

fn push_trial(
    study: &mut Study,
    point: DesignPoint,
    source: TrialSource,
    outcome: Result<(f64, f64), String>,
) {
    let index = study.trials.len();
    let objective = study.objective;
    let (energy, latency, loss, penalized) = match outcome {
        Ok((energy, latency))
            if energy > 0.0 && latency > 0.0 && energy.is_finite() && latency.is_finite() =>
        {
            let loss = match objective.mode {
                ObjectiveMode::Scalarized => TrialLoss::Scalar(
                    scalarized_cost(energy, latency, objective.beta, objective.gamma)
                        .expect("positive objectives"),
                ),
                ObjectiveMode::MultiObjective => {
                    TrialLoss::Pair { ln_energy: energy.ln(), ln_latency: latency.ln() }
                }
            };
            (energy, latency, loss, false)
        }
        outcome => {
            if let Err(msg) = &outcome {
                log::warn!(target: "Optimizer", "trial {index} penalized: {msg}");
            }
            let loss = match (objective.mode, study.reference_point) {
                (ObjectiveMode::Scalarized, _) => TrialLoss::Scalar(objective.penalty),
                // Before the reference point exists (warm-up), penalized
                // pairs hold the penalty value and are rewritten to the
                // reference point when it is frozen.
                (ObjectiveMode::MultiObjective, Some(r)) => {
                    TrialLoss::Pair { ln_energy: r.0[0], ln_latency: r.0[1] }
                }
                (ObjectiveMode::MultiObjective, None) => {
                    TrialLoss::Pair { ln_energy: objective.penalty, ln_latency: objective.penalty }
                }
            };
            let (energy, latency) = outcome.unwrap_or((0.0, 0.0));
            (energy.max(0.0), latency.max(0.0), loss, true)
        }
    };
    study.trials.push(Trial { index, point, energy, latency, loss, source, penalized });

    match objective.mode {
        ObjectiveMode::Scalarized => {
            let loss = study.trials[index].scalar_loss().expect("scalar");
            let better = study.best_loss().map_or(true, |b| loss < b);
            if better {
                study.incumbent = Some(index);
            }
        }
        ObjectiveMode::MultiObjective => {
            if study.reference_point.is_some() {
                refresh_front_and_hypervolume(study);
            }
        }
    }
}

fn front_of_prefix(study: &Study, len: usize) -> ParetoFront {
    let pairs: Vec<[f64; 2]> = study.trials[..len]
        .iter()
        .map(|t| t.objective_pair().expect("MOO study stores objective pairs"))
        .collect();
    pareto_front(&pairs)
}

fn refresh_front_and_hypervolume(study: &mut Study) {
    let reference = study.reference_point.expect("frozen");
    // The stored front is restricted to members that dominate the reference
    // point; trials outside the reference box stay in the history but carry
    // no hypervolume and are not reported as front members.
    let front = front_of_prefix(study, study.trials.len()).restricted_to(&reference);
    let hv = hypervolume_2d(&front, &reference)
        .expect("restricted members dominate the reference point");
    study.hv_trace.push(hv);
    study.pareto = Some(front);
}

/// Freezes the reference point from the warm-up trials: component-wise max
/// of the valid objective pairs plus a 10% margin, then rewrites penalized
/// warm-up pairs to the reference point and fills the hypervolume trace
/// retroactively.
fn freeze_reference_point(study: &mut Study) {
    let valid: Vec<[f64; 2]> = study
        .trials
        .iter()
        .filter(|t| !t.penalized)
        .filter_map(Trial::objective_pair)
        .collect();
    let reference = if valid.is_empty() {
        ReferencePoint([1.0, 1.0])
    } else {
        let m0 = valid.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        let m1 = valid.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
        ReferencePoint([margin(m0), margin(m1)])
    };
    study.reference_point = Some(reference);
    for t in &mut study.trials {
        if t.penalized {
            t.loss = TrialLoss::Pair { ln_energy: reference.0[0], ln_latency: reference.0[1] };
        }
    }
    study.hv_trace.clear();
    for len in 1..=study.trials.len() {
        let front = front_of_prefix(study, len).restricted_to(&reference);
        let hv = hypervolume_2d(&front, &reference)
            .expect("restricted members dominate the reference point");
        study.hv_trace.push(hv);
        if len == study.trials.len() {
            study.pareto = Some(front);
        }
    }
}

fn margin(m: f64) -> f64 {
    m + 0.1 * m.abs().max(1e-3)
}

fn new_study(
    objective: ObjectiveSpec,
    kernel_family: Option<KernelFamily>,
    budget: usize,
    n_init: usize,
    seed: u64,
) -> Study {
    Study {
        objective,
        kernel_family,
        budget,
        n_init,
        seed,
        trials: Vec::new(),
        incumbent: None,
        pareto: None,
        reference_point: None,
        hv_trace: Vec::new(),
        gp_history: Vec::new(),
    }
}

/// Runs a full BO study: `n_init` Sobol warm-up trials, then
/// acquisition-driven proposals up to `budget`. The evaluator maps a design
/// point to `(total energy J, aggregated latency s)`; failures are recorded
/// as penalized trials. Deterministic for fixed inputs.
pub fn run_study<E>(
    space: &SearchSpace,
    objective: ObjectiveSpec,
    kernel_family: KernelFamily,
    budget: usize,
    n_init: usize,
    seed: u64,
    mut evaluator: E,
) -> Result<Study, OptError>
where
    E: FnMut(&DesignPoint) -> Result<(f64, f64), String>,
{
    objective.validate()?;
    if n_init == 0 || budget < n_init {
        return Err(OptError::BadBudget { budget, n_init });
    }
    let mut rng = stream_rng(seed, Stream::Optimizer);
    let mut study = new_study(objective, Some(kernel_family), budget, n_init, seed);

    for point in sobol_sample(n_init, space)? {
        let outcome = evaluator(&point);
        push_trial(&mut study, point, TrialSource::Sobol, outcome);
    }
    if objective.mode == ObjectiveMode::MultiObjective {
        freeze_reference_point(&mut study);
    }

    let cfg = ProposalConfig::default();
    for _ in n_init..budget {
        let proposal = propose_internal(&study, space, kernel_family, &objective, &cfg, &mut rng)?;
        study.gp_history.extend(proposal.snapshots);
        let source = if proposal.fell_back { TrialSource::Random } else { TrialSource::Bo };
        let outcome = evaluator(&proposal.point);
        push_trial(&mut study, proposal.point, source, outcome);
    }
    Ok(study)
}

/// Uniform random search with the same bookkeeping as [`run_study`]. In
/// multi-objective mode the reference point freezes after the first
/// `min(10, budget)` trials.
pub fn random_search<E>(
    space: &SearchSpace,
    objective: ObjectiveSpec,
    budget: usize,
    seed: u64,
    mut evaluator: E,
) -> Result<Study, OptError>
where
    E: FnMut(&DesignPoint) -> Result<(f64, f64), String>,
{
    objective.validate()?;
    if budget == 0 {
        return Err(OptError::BadBudget { budget, n_init: 1 });
    }
    let freeze_at = 10.min(budget);
    let mut rng = stream_rng(seed, Stream::Optimizer);
    let mut study = new_study(objective, None, budget, freeze_at, seed);
    for i in 0..budget {
        let point = random_sample(space, &mut rng);
        let outcome = evaluator(&point);
        push_trial(&mut study, point, TrialSource::Random, outcome);
        if objective.mode == ObjectiveMode::MultiObjective && i + 1 == freeze_at {
            freeze_reference_point(&mut study);
        }
    }
    Ok(study)
}

#[cfg(test)]
mod tests;
