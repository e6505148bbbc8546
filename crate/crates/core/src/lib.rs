//! Simulation and tuning of task scheduling on heterogeneous multi-core
//! processors.
//!
//! The crate is organized as a pipeline:
//!
//! - [`workload`] generates reproducible task sets (Poisson arrivals with
//!   randomized per-task attributes).
//! - [`sim`] runs a deterministic discrete-event simulation of those tasks
//!   on a configurable set of cores under FCFS, Round-Robin, or
//!   priority-based scheduling, with a physical energy/latency model.
//! - [`space`] defines the mixed design space of hardware/scheduler knobs
//!   and maps design points onto a continuous unit cube.
//! - [`gp`] is a Gaussian-process regression surrogate with ARD RBF and
//!   Matérn kernels, fitted by maximizing the log marginal likelihood.
//! - [`bo`] is the Bayesian-optimization loop: scalarized log-cost, LogEI
//!   and EHVI acquisitions, Pareto-front maintenance, hypervolume, and a
//!   random-search baseline.
//! - [`analysis`] turns fitted surrogates into per-parameter sensitivity
//!   reports and renders SVG plots with CSV sidecars.

pub mod analysis;
pub mod bo;
pub mod gp;
pub mod rng;
pub mod sim;
pub mod space;
pub mod workload;

pub use bo::{
    pareto_front, random_search, run_study, scalarized_cost, ObjectiveMode, ObjectiveSpec,
    ParetoFront, ReferencePoint, Study, Trial, TrialLoss, TrialSource,
};
pub use gp::{fit_gp, GpModel, KernelFamily, KernelSpec, Posterior};
pub use sim::{
    run_simulation, CoreClass, CoreSpec, EventLog, PolicyKind, PowerConstants, SchedulerPolicy,
    SimResult, SystemConfig,
};
pub use space::{default_space, DesignPoint, ParamDef, ParamKind, ParamValue, SearchSpace};
pub use workload::{generate_tasks, sample_arrivals, Task, TaskSet, WorkloadSpec};
