use super::*;
use crate::workload::{generate_tasks, Task, WorkloadSpec};
use approx::assert_relative_eq;

fn one_core(freq: f64, policy: SchedulerPolicy) -> SystemConfig {
    SystemConfig {
        cores: vec![CoreSpec { core_class: CoreClass::Big, frequency: freq, id: 0 }],
        policy,
        constants: PowerConstants::default(),
    }
}

fn task_set(tasks: Vec<(f64, u64, u32)>) -> TaskSet {
    let tasks = tasks
        .into_iter()
        .enumerate()
        .map(|(id, (arrival_time, instruction_count, priority))| Task {
            id,
            arrival_time,
            instruction_count,
            priority,
            finish_time: None,
            energy: None,
        })
        .collect();
    TaskSet { tasks, spec: WorkloadSpec::default() }
}

/// Straight-line queueing recurrence for FCFS on one core:
/// `finish(i) = max(arrival(i), finish(i-1)) + exec(i)`.
fn fcfs_single_core_oracle(tasks: &TaskSet, freq: f64, constants: &PowerConstants) -> Vec<f64> {
    let mut prev = 0.0_f64;
    tasks
        .tasks
        .iter()
        .map(|t| {
            let exec = t.instruction_count as f64 / (constants.ipc * freq);
            prev = prev.max(t.arrival_time) + exec;
            prev
        })
        .collect()
}

#[test]
fn fcfs_two_tasks_hand_trace() {
    let config = one_core(1e9, SchedulerPolicy::fcfs());
    let tasks = task_set(vec![(0.0, 1_000_000, 0), (0.0, 2_000_000, 0)]);
    let (res, log) = run_simulation(&config, &tasks).unwrap();
    assert_relative_eq!(res.per_task[0].finish_time, 1e-3, max_relative = 1e-12);
    assert_relative_eq!(res.per_task[1].finish_time, 3e-3, max_relative = 1e-12);
    assert_relative_eq!(res.makespan, 3e-3, max_relative = 1e-12);
    assert!(log.render().contains("Task 0 arrived at time 0, with instruction 1000000."));
}

#[test]
fn round_robin_two_tasks_hand_trace() {
    // Slices: T0 [0, 0.5], T1 [0.5, 1.0], T0 [1.0, 1.5] done, T1 runs out at 3.0 ms.
    let config = one_core(1e9, SchedulerPolicy::round_robin(0.5e-3));
    let tasks = task_set(vec![(0.0, 1_000_000, 0), (0.0, 2_000_000, 0)]);
    let (res, log) = run_simulation(&config, &tasks).unwrap();
    assert_relative_eq!(res.per_task[0].finish_time, 1.5e-3, max_relative = 1e-12);
    assert_relative_eq!(res.per_task[1].finish_time, 3.0e-3, max_relative = 1e-12);
    assert!(log.render().contains("quantum expired, enqueuing again."));
}

#[test]
fn single_task_is_contention_free_under_any_policy() {
    for policy in [
        SchedulerPolicy::fcfs(),
        SchedulerPolicy::round_robin(0.4e-3),
        SchedulerPolicy::priority(0.4e-3),
    ] {
        let config = one_core(2e9, policy);
        let tasks = task_set(vec![(1e-3, 3_141_592, 2)]);
        let (res, _) = run_simulation(&config, &tasks).unwrap();
        let exec = physics::execution_time(3_141_592, &config.constants, 2e9).unwrap();
        let energy = physics::task_active_energy(3_141_592, 2e9, &config.constants).unwrap();
        assert_relative_eq!(res.per_task[0].turnaround, exec, max_relative = 1e-9);
        assert_relative_eq!(res.per_task[0].energy, energy, max_relative = 1e-9);
    }
}

#[test]
fn fcfs_matches_queueing_recurrence_exactly() {
    for seed in 0..20 {
        let spec = WorkloadSpec { max_tasks: 40, arrival_rate: 2000.0, ..WorkloadSpec::default() };
        let tasks = generate_tasks(&spec, seed).unwrap();
        let config = one_core(1.3e9, SchedulerPolicy::fcfs());
        let (res, _) = run_simulation(&config, &tasks).unwrap();
        let oracle = fcfs_single_core_oracle(&tasks, 1.3e9, &config.constants);
        for (got, want) in res.per_task.iter().zip(&oracle) {
            assert_eq!(got.finish_time, *want);
        }
    }
}

#[test]
fn round_robin_reduces_to_fcfs_for_huge_quantum() {
    let spec = WorkloadSpec { max_tasks: 30, ..WorkloadSpec::default() };
    let tasks = generate_tasks(&spec, 11).unwrap();
    let fcfs = run_simulation(&one_core(1e9, SchedulerPolicy::fcfs()), &tasks).unwrap().0;
    // Quantum longer than the total workload: no slice ever expires.
    let rr = run_simulation(&one_core(1e9, SchedulerPolicy::round_robin(1e4)), &tasks).unwrap().0;
    for (a, b) in fcfs.per_task.iter().zip(&rr.per_task) {
        assert_eq!(a.finish_time, b.finish_time);
    }
}

#[test]
fn priority_queue_orders_by_priority_then_arrival() {
    // All arrive while the core is busy; the priority-0 task runs next even
    // though it arrived last.
    let config = one_core(1e9, SchedulerPolicy::priority(10.0));
    let tasks = task_set(vec![
        (0.0, 1_000_000, 3),
        (1e-4, 1_000_000, 2),
        (2e-4, 1_000_000, 0),
    ]);
    let (res, _) = run_simulation(&config, &tasks).unwrap();
    assert!(res.per_task[2].finish_time < res.per_task[1].finish_time);
    assert_relative_eq!(res.per_task[0].finish_time, 1e-3, max_relative = 1e-12);
}

#[test]
fn priority_preemption_at_quantum_boundary() {
    // T0 (low priority, long) starts alone; T1 (high priority) arrives during
    // T0's first quantum and takes over at the boundary.
    let config = one_core(1e9, SchedulerPolicy::priority(0.5e-3));
    let tasks = task_set(vec![(0.0, 2_000_000, 3), (1e-4, 1_000_000, 0)]);
    let (res, _) = run_simulation(&config, &tasks).unwrap();
    assert_relative_eq!(res.per_task[1].finish_time, 1.5e-3, max_relative = 1e-12);
    assert_relative_eq!(res.per_task[0].finish_time, 3.0e-3, max_relative = 1e-12);
}

#[test]
fn energy_decomposition_and_makespan_bound() {
    for seed in 0..10 {
        let spec = WorkloadSpec { max_tasks: 60, ..WorkloadSpec::default() };
        let tasks = generate_tasks(&spec, seed).unwrap();
        let config = SystemConfig::from_class_counts(
            (2, 0.9e9),
            (1, 1.8e9),
            (1, 3.0e9),
            SchedulerPolicy::round_robin(0.7e-3),
            PowerConstants::default(),
        );
        let (res, _) = run_simulation(&config, &tasks).unwrap();

        let sum: f64 = res.per_core.iter().map(|c| c.dynamic_energy + c.leakage_energy).sum();
        assert_relative_eq!(res.total_energy, sum, max_relative = 1e-12);

        for (core, usage) in config.cores.iter().zip(&res.per_core) {
            let p_dyn = physics::dynamic_power(core.frequency, &config.constants).unwrap();
            let p_leak = physics::leakage_power(core.frequency, &config.constants).unwrap();
            assert_relative_eq!(usage.dynamic_energy, p_dyn * usage.busy_time, max_relative = 1e-9);
            assert_relative_eq!(usage.leakage_energy, p_leak * res.makespan, max_relative = 1e-12);
            assert!(usage.busy_time <= res.makespan + 1e-15);
        }

        // Makespan is at least any task's arrival plus its solo time on the
        // fastest core.
        let fastest = config.cores.iter().map(|c| c.frequency).fold(0.0, f64::max);
        for t in &tasks.tasks {
            let solo = physics::execution_time(t.instruction_count, &config.constants, fastest).unwrap();
            assert!(res.makespan >= t.arrival_time + solo - 1e-12);
        }

        // Turnaround is at least the solo execution time on the hosting core,
        // hence at least the solo time on the fastest core.
        for (t, outcome) in tasks.tasks.iter().zip(&res.per_task) {
            let solo = physics::execution_time(t.instruction_count, &config.constants, fastest).unwrap();
            assert!(outcome.turnaround >= solo - 1e-12);
        }
    }
}

#[test]
fn simulation_is_deterministic() {
    let spec = WorkloadSpec { max_tasks: 80, ..WorkloadSpec::default() };
    let tasks = generate_tasks(&spec, 5).unwrap();
    for policy in [
        SchedulerPolicy::fcfs(),
        SchedulerPolicy::round_robin(1e-3),
        SchedulerPolicy::priority(1e-3),
    ] {
        let config = SystemConfig::from_class_counts(
            (2, 1.1e9),
            (2, 2.0e9),
            (1, 3.2e9),
            policy,
            PowerConstants::default(),
        );
        let (r1, l1) = run_simulation(&config, &tasks).unwrap();
        let (r2, l2) = run_simulation(&config, &tasks).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(l1, l2);
    }
}

#[test]
fn zero_cores_is_a_configuration_error() {
    let config = SystemConfig {
        cores: vec![],
        policy: SchedulerPolicy::fcfs(),
        constants: PowerConstants::default(),
    };
    let tasks = task_set(vec![(0.0, 1000, 0)]);
    assert_eq!(run_simulation(&config, &tasks).unwrap_err(), SimError::NoCores);
}

#[test]
fn policy_validation() {
    assert!(SchedulerPolicy::fcfs().validate().is_ok());
    assert!(SchedulerPolicy { kind: PolicyKind::Fcfs, quantum: Some(1e-3) }.validate().is_err());
    assert!(SchedulerPolicy { kind: PolicyKind::RoundRobin, quantum: None }.validate().is_err());
    assert!(SchedulerPolicy::round_robin(-1.0).validate().is_err());
    assert!(SchedulerPolicy::priority(2e-3).validate().is_ok());
}

#[test]
fn event_log_times_non_decreasing_and_renders_info_lines() {
    let spec = WorkloadSpec { max_tasks: 25, ..WorkloadSpec::default() };
    let tasks = generate_tasks(&spec, 2).unwrap();
    let config = one_core(1e9, SchedulerPolicy::round_robin(0.5e-3));
    let (_, log) = run_simulation(&config, &tasks).unwrap();
    for w in log.records.windows(2) {
        assert!(w[0].time <= w[1].time);
    }
    for line in log.render().lines() {
        assert!(line.starts_with("INFO:"));
    }
}

#[test]
fn empty_task_set_gives_zeroed_result() {
    let config = one_core(1e9, SchedulerPolicy::fcfs());
    let tasks = task_set(vec![]);
    let (res, _) = run_simulation(&config, &tasks).unwrap();
    assert!(res.per_task.is_empty());
    assert_eq!(res.makespan, 0.0);
    assert_eq!(res.total_energy, 0.0);
    assert_eq!(res.aggregated_latency, 0.0);
}

#[test]
fn result_serializes_to_json_and_csv() {
    let config = one_core(1e9, SchedulerPolicy::fcfs());
    let tasks = task_set(vec![(0.0, 1_000_000, 1)]);
    let (res, _) = run_simulation(&config, &tasks).unwrap();
    let json = res.to_json();
    let back: SimResult = serde_json::from_str(&json).unwrap();
    assert_eq!(res, back);
    let csv = res.per_task_csv();
    assert!(csv.starts_with("id,finish_ms,turnaround_ms,energy_j\n"));
    assert_eq!(csv.lines().count(), 2);
}
