//! Deterministic discrete-event simulation of heterogeneous multi-core
//! execution.
//!
//! Cores share one global ready queue; heterogeneity enters only through
//! per-core speed (`ipc * frequency` instructions per second). Three
//! policies are supported:
//!
//! - FCFS: non-preemptive, strict arrival order.
//! - Round-Robin: a running task is preempted after one quantum of service
//!   and re-enqueued at the tail unless finished.
//! - Priority: the ready queue is ordered by `(priority, arrival, id)`;
//!   preemption is checked at quantum boundaries, i.e. whenever a quantum
//!   expires the highest-priority ready task is (re)selected.
//!
//! Energy accounting: a core draws dynamic power only while executing and
//! leakage power from `t = 0` until the global makespan. Classes with a
//! zero core count simply have no cores and consume nothing.
//!
//! Simultaneous events are processed in `(time, kind, core id, task id)`
//! order with arrivals before slice ends; free cores are offered work in
//! ascending core-id order. Identical inputs produce bit-identical results.

pub mod physics;

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::workload::TaskSet;
use physics::{aggregated_latency, dynamic_power, leakage_power};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("system has no cores")]
    NoCores,
    #[error("frequency {f} Hz is below the voltage-model intercept b_f = {b_f} Hz")]
    FrequencyBelowIntercept { f: f64, b_f: f64 },
    #[error("frequency must be positive, got {0} Hz")]
    NonPositiveFrequency(f64),
    #[error("duration must be non-negative, got {0} s")]
    NegativeDuration(f64),
    #[error("{kind:?} scheduling requires a positive quantum")]
    MissingQuantum { kind: PolicyKind },
    #[error("FCFS scheduling does not take a quantum")]
    UnexpectedQuantum,
    #[error("quantum must be positive, got {0} s")]
    NonPositiveQuantum(f64),
    #[error("tasks must be sorted by arrival time with dense ids 0..n")]
    MalformedTaskSet,
}

/// Constants of the frequency/voltage and power model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerConstants {
    /// Voltage-to-frequency slope, Hz per volt.
    pub k_v: f64,
    /// Frequency at zero voltage, Hz.
    pub b_f: f64,
    /// Switched capacitance, farads.
    pub capacitance: f64,
    /// Leakage current, amperes.
    pub leakage_current: f64,
    /// Fraction of transistors switching while executing, in `[0, 1]`.
    pub activity: f64,
    /// Instructions per cycle.
    pub ipc: f64,
}

impl Default for PowerConstants {
    fn default() -> Self {
        Self {
            k_v: 5e9,
            b_f: 0.0,
            capacitance: 1e-9,
            leakage_current: 0.3,
            activity: 1.0,
            ipc: 1.0,
        }
    }
}

/// Core size class of the heterogeneous system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoreClass {
    Little,
    Medium,
    Big,
}

impl std::fmt::Display for CoreClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoreClass::Little => write!(f, "little"),
            CoreClass::Medium => write!(f, "medium"),
            CoreClass::Big => write!(f, "big"),
        }
    }
}

/// A single core running at a fixed frequency for the whole simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoreSpec {
    pub core_class: CoreClass,
    /// Operating frequency in Hz.
    pub frequency: f64,
    pub id: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    Fcfs,
    RoundRobin,
    Priority,
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolicyKind::Fcfs => write!(f, "FCFS"),
            PolicyKind::RoundRobin => write!(f, "Round Robin"),
            PolicyKind::Priority => write!(f, "Priority"),
        }
    }
}

/// Scheduling policy plus its time slice, present iff the policy uses one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerPolicy {
    pub kind: PolicyKind,
    /// Time slice in seconds for Round-Robin and Priority.
    pub quantum: Option<f64>,
}

impl SchedulerPolicy {
    pub fn fcfs() -> Self {
        Self { kind: PolicyKind::Fcfs, quantum: None }
    }

    pub fn round_robin(quantum: f64) -> Self {
        Self { kind: PolicyKind::RoundRobin, quantum: Some(quantum) }
    }

    pub fn priority(quantum: f64) -> Self {
        Self { kind: PolicyKind::Priority, quantum: Some(quantum) }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        match (self.kind, self.quantum) {
            (PolicyKind::Fcfs, None) => Ok(()),
            (PolicyKind::Fcfs, Some(_)) => Err(SimError::UnexpectedQuantum),
            (kind, None) => Err(SimError::MissingQuantum { kind }),
            (_, Some(q)) if q <= 0.0 => Err(SimError::NonPositiveQuantum(q)),
            _ => Ok(()),
        }
    }
}

/// A complete system to simulate: cores, policy, and power constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub cores: Vec<CoreSpec>,
    pub policy: SchedulerPolicy,
    pub constants: PowerConstants,
}

impl SystemConfig {
    /// Builds a config from per-class `(count, frequency_hz)` pairs, ids
    /// assigned in little, medium, big order.
    pub fn from_class_counts(
        little: (usize, f64),
        medium: (usize, f64),
        big: (usize, f64),
        policy: SchedulerPolicy,
        constants: PowerConstants,
    ) -> Self {
        let mut cores = Vec::new();
        for (class, (count, freq)) in [
            (CoreClass::Little, little),
            (CoreClass::Medium, medium),
            (CoreClass::Big, big),
        ] {
            for _ in 0..count {
                cores.push(CoreSpec { core_class: class, frequency: freq, id: cores.len() });
            }
        }
        Self { cores, policy, constants }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.cores.is_empty() {
            return Err(SimError::NoCores);
        }
        self.policy.validate()?;
        for c in &self.cores {
            if c.frequency <= 0.0 {
                return Err(SimError::NonPositiveFrequency(c.frequency));
            }
            if c.frequency < self.constants.b_f {
                return Err(SimError::FrequencyBelowIntercept {
                    f: c.frequency,
                    b_f: self.constants.b_f,
                });
            }
        }
        Ok(())
    }
}

/// Per-task simulation outcome, indexed by task id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    /// Completion time in seconds.
    pub finish_time: f64,
    /// `finish_time - arrival_time` in seconds.
    pub turnaround: f64,
    /// Energy spent executing this task, in joules.
    pub energy: f64,
}

/// Per-core accounting, indexed by core id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoreUsage {
    /// Total time spent executing, in seconds.
    pub busy_time: f64,
    /// Switching energy over all executed slices, in joules.
    pub dynamic_energy: f64,
    /// Leakage energy from `t = 0` to the makespan, in joules.
    pub leakage_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub per_task: Vec<TaskOutcome>,
    pub per_core: Vec<CoreUsage>,
    /// Sum of all per-core dynamic and leakage energies, in joules.
    pub total_energy: f64,
    /// Priority-weighted sum of per-task turnarounds, in seconds.
    pub aggregated_latency: f64,
    /// Time of the last task completion, in seconds.
    pub makespan: f64,
}

impl SimResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("SimResult is always serializable")
    }

    /// CSV rendering, one row per task: `id,finish_ms,turnaround_ms,energy_j`.
    pub fn per_task_csv(&self) -> String {
        let mut out = String::from("id,finish_ms,turnaround_ms,energy_j\n");
        for (id, t) in self.per_task.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                id,
                t.finish_time * 1e3,
                t.turnaround * 1e3,
                t.energy
            ));
        }
        out
    }
}

/// One timestamped log record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub time: f64,
    pub component: String,
    pub message: String,
}

/// Ordered event log; record times are non-decreasing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub records: Vec<LogRecord>,
}

impl EventLog {
    fn push(&mut self, time: f64, component: &str, message: String) {
        debug_assert!(self.records.last().map_or(true, |r| r.time <= time));
        self.records.push(LogRecord { time, component: component.to_string(), message });
    }

    /// Renders each record as an `INFO:<component>:<message>` line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&format!("INFO:{}:{}\n", r.component, r.message));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    /// Task arrival; ordered before slice ends at the same instant.
    Arrival { task: usize },
    SliceEnd { core: usize, task: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Event {
    time: f64,
    kind: EventKind,
}

impl Event {
    fn sort_key(&self) -> (u8, usize, usize) {
        match self.kind {
            EventKind::Arrival { task } => (0, 0, task),
            EventKind::SliceEnd { core, task } => (1, core, task),
        }
    }
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.sort_key().cmp(&other.sort_key()))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Global ready queue. FCFS and Round-Robin use FIFO order; Priority keeps
/// tasks ordered by `(priority, arrival time, id)`.
enum ReadyQueue {
    Fifo(VecDeque<usize>),
    Ordered(BTreeSet<(u32, u64, usize)>),
}

impl ReadyQueue {
    fn push(&mut self, task: usize, priority: u32, arrival: f64) {
        match self {
            ReadyQueue::Fifo(q) => q.push_back(task),
            // Arrival times are non-negative, so their IEEE bit patterns
            // order the same way as their values.
            ReadyQueue::Ordered(q) => {
                q.insert((priority, arrival.to_bits(), task));
            }
        }
    }

    fn pop(&mut self) -> Option<usize> {
        match self {
            ReadyQueue::Fifo(q) => q.pop_front(),
            ReadyQueue::Ordered(q) => q.pop_first().map(|(_, _, task)| task),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            ReadyQueue::Fifo(q) => q.is_empty(),
            ReadyQueue::Ordered(q) => q.is_empty(),
        }
    }
}

struct RunningSlice {
    task: usize,
    len: f64,
    /// Instructions consumed if the slice runs to its end.
    work: f64,
    /// The task completes at the end of this slice.
    finishes: bool,
}

/// Runs `tasks` to completion on `config` and reports per-task, per-core,
/// and aggregate metrics plus the event log.
pub fn run_simulation(config: &SystemConfig, tasks: &TaskSet) -> Result<(SimResult, EventLog), SimError> {
    config.validate()?;
    let n_tasks = tasks.tasks.len();
    for (i, t) in tasks.tasks.iter().enumerate() {
        let sorted = i == 0 || tasks.tasks[i - 1].arrival_time <= t.arrival_time;
        if t.id != i || !sorted {
            return Err(SimError::MalformedTaskSet);
        }
    }

    let n_cores = config.cores.len();
    let constants = &config.constants;
    let mut p_dyn = Vec::with_capacity(n_cores);
    let mut p_leak = Vec::with_capacity(n_cores);
    let mut rate = Vec::with_capacity(n_cores);
    for c in &config.cores {
        p_dyn.push(dynamic_power(c.frequency, constants)?);
        p_leak.push(leakage_power(c.frequency, constants)?);
        rate.push(constants.ipc * c.frequency);
    }

    let mut log = EventLog::default();
    log.push(0.0, "Simulator", format!("Initialized with {} processors.", n_cores));
    for c in &config.cores {
        log.push(0.0, &format!("Processor {}", c.id), format!("Frequency = {} GHz.", c.frequency / 1e9));
    }
    let scheduler_component = format!("{} scheduler", config.policy.kind);
    if let Some(q) = config.policy.quantum {
        log.push(0.0, &scheduler_component, format!("Initialized with quantum = {} ms.", q * 1e3));
    } else {
        log.push(0.0, &scheduler_component, "Initialized.".to_string());
    }

    let mut events: BinaryHeap<std::cmp::Reverse<Event>> = BinaryHeap::new();
    for t in &tasks.tasks {
        events.push(std::cmp::Reverse(Event {
            time: t.arrival_time,
            kind: EventKind::Arrival { task: t.id },
        }));
    }

    let mut ready = match config.policy.kind {
        PolicyKind::Fcfs | PolicyKind::RoundRobin => ReadyQueue::Fifo(VecDeque::new()),
        PolicyKind::Priority => ReadyQueue::Ordered(BTreeSet::new()),
    };
    let quantum = config.policy.quantum;

    let mut running: Vec<Option<RunningSlice>> = (0..n_cores).map(|_| None).collect();
    let mut remaining: Vec<f64> = tasks.tasks.iter().map(|t| t.instruction_count as f64).collect();
    let mut finish: Vec<Option<f64>> = vec![None; n_tasks];
    let mut task_energy = vec![0.0_f64; n_tasks];
    let mut busy = vec![0.0_f64; n_cores];
    let mut dyn_energy = vec![0.0_f64; n_cores];
    let mut makespan = 0.0_f64;

    while let Some(std::cmp::Reverse(head)) = events.pop() {
        let now = head.time;
        let mut batch = vec![head];
        while let Some(std::cmp::Reverse(next)) = events.peek() {
            if next.time == now {
                batch.push(events.pop().unwrap().0);
            } else {
                break;
            }
        }

        for ev in batch {
            match ev.kind {
                EventKind::Arrival { task } => {
                    let t = &tasks.tasks[task];
                    log.push(
                        now,
                        "Simulator",
                        format!(
                            "Task {} arrived at time {}, with instruction {}.",
                            task, t.arrival_time, t.instruction_count
                        ),
                    );
                    ready.push(task, t.priority, t.arrival_time);
                }
                EventKind::SliceEnd { core, task } => {
                    let slice = running[core].take().expect("slice end on an idle core");
                    debug_assert_eq!(slice.task, task);
                    busy[core] += slice.len;
                    dyn_energy[core] += p_dyn[core] * slice.len;
                    task_energy[task] += (p_dyn[core] + p_leak[core]) * slice.len;
                    if slice.finishes {
                        remaining[task] = 0.0;
                        finish[task] = Some(now);
                        makespan = makespan.max(now);
                        log.push(now, "Simulator", format!("Task {} finished at time {}.", task, now));
                    } else {
                        remaining[task] = (remaining[task] - slice.work).max(0.0);
                        let t = &tasks.tasks[task];
                        log.push(
                            now,
                            &scheduler_component,
                            format!("Task {} quantum expired, enqueuing again.", task),
                        );
                        ready.push(task, t.priority, t.arrival_time);
                    }
                }
            }
        }

        // Offer work to free cores in ascending id order.
        for core in 0..n_cores {
            if running[core].is_some() {
                continue;
            }
            let Some(task) = ready.pop() else { break };
            let time_to_finish = remaining[task] / rate[core];
            let (len, work, finishes) = match quantum {
                Some(q) if time_to_finish > q => (q, q * rate[core], false),
                _ => (time_to_finish, remaining[task], true),
            };
            log.push(
                now,
                &scheduler_component,
                format!("Task {} dispatched to processor {}.", task, core),
            );
            running[core] = Some(RunningSlice { task, len, work, finishes });
            events.push(std::cmp::Reverse(Event {
                time: now + len,
                kind: EventKind::SliceEnd { core, task },
            }));
        }
        // Work conservation: after dispatch no core may idle while tasks wait.
        debug_assert!(ready.is_empty() || running.iter().all(|r| r.is_some()));
    }

    let per_task: Vec<TaskOutcome> = (0..n_tasks)
        .map(|id| {
            let finish_time = finish[id].expect("simulation drained with unfinished task");
            TaskOutcome {
                finish_time,
                turnaround: finish_time - tasks.tasks[id].arrival_time,
                energy: task_energy[id],
            }
        })
        .collect();

    let per_core: Vec<CoreUsage> = (0..n_cores)
        .map(|c| CoreUsage {
            busy_time: busy[c],
            dynamic_energy: dyn_energy[c],
            leakage_energy: p_leak[c] * makespan,
        })
        .collect();

    let total_energy = per_core.iter().map(|c| c.dynamic_energy + c.leakage_energy).sum();
    let latency_items: Vec<(u32, f64)> = tasks
        .tasks
        .iter()
        .map(|t| (t.priority, per_task[t.id].turnaround))
        .collect();

    let result = SimResult {
        per_task,
        per_core,
        total_energy,
        aggregated_latency: aggregated_latency(&latency_items),
        makespan,
    };
    Ok((result, log))
}

#[cfg(test)]
mod tests;
