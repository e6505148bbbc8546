use super::*;
use crate::space::{default_space, validate, ParamDef, SearchSpace};
use approx::assert_relative_eq;

#[test]
fn scalarized_cost_closed_forms() {
    assert_eq!(scalarized_cost(1.0, 1.0, 3.0, 7.0).unwrap(), 0.0);
    let e = std::f64::consts::E;
    assert_relative_eq!(
        scalarized_cost(e, e * e, 3.0, 1.0).unwrap(),
        5.0,
        max_relative = 1e-12
    );
    // Equal weights: swapping objectives leaves the loss unchanged.
    assert_relative_eq!(
        scalarized_cost(0.3, 7.2, 1.0, 1.0).unwrap(),
        scalarized_cost(7.2, 0.3, 1.0, 1.0).unwrap(),
        max_relative = 1e-12
    );
    assert!(scalarized_cost(0.0, 1.0, 1.0, 1.0).is_err());
    assert!(scalarized_cost(1.0, -2.0, 1.0, 1.0).is_err());
}

#[test]
fn objective_validation() {
    assert!(ObjectiveSpec::scalarized(1.0, 1.0).validate().is_ok());
    assert!(ObjectiveSpec::scalarized(0.0, 0.0).validate().is_err());
    assert!(ObjectiveSpec::scalarized(-1.0, 1.0).validate().is_err());
    assert!(ObjectiveSpec { penalty: f64::INFINITY, ..Default::default() }.validate().is_err());
    // Zero weights are allowed in multi-objective mode (they are unused).
    assert!(ObjectiveSpec::multi_objective().validate().is_ok());
}

/// Deterministic synthetic evaluator: a smooth bowl over the encoded
/// frequencies with a preferred scheduler, exercising the full loop without
/// the simulator.
fn toy_evaluator(point: &DesignPoint) -> Result<(f64, f64), String> {
    let fl = point.float("freq_little_ghz").unwrap();
    let fb = point.float("freq_big_ghz").unwrap();
    let cb = point.int("count_big").unwrap() as f64;
    let sched_bonus = match point.cat("scheduler").unwrap() {
        "FCFS" => 0.0,
        "RR" => 0.08,
        _ => 0.12,
    };
    let energy = 0.2 + (fl - 0.8).powi(2) + 0.05 * cb + sched_bonus;
    let latency = 0.4 + (fb - 3.0).powi(2) / (1.0 + cb);
    Ok((energy, latency))
}

#[test]
fn sobol_warmup_then_bo_sources() {
    let space = default_space();
    let study = run_study(
        &space,
        ObjectiveSpec::default(),
        KernelFamily::Matern52,
        16,
        6,
        3,
        toy_evaluator,
    )
    .unwrap();
    assert_eq!(study.trials.len(), 16);
    assert!(study.trials[..6].iter().all(|t| t.source == TrialSource::Sobol));
    assert!(study.trials[6..].iter().all(|t| t.source == TrialSource::Bo));
    for t in &study.trials {
        assert!(validate(&t.point, &space).is_empty());
        assert_eq!(t.index, study.trials.iter().position(|u| u == t).unwrap());
    }
}

#[test]
fn budget_equal_to_n_init_is_pure_sobol() {
    let space = default_space();
    let study = run_study(
        &space,
        ObjectiveSpec::default(),
        KernelFamily::Rbf,
        5,
        5,
        1,
        toy_evaluator,
    )
    .unwrap();
    assert!(study.trials.iter().all(|t| t.source == TrialSource::Sobol));
    assert!(study.gp_history.is_empty());
}

#[test]
fn studies_are_deterministic() {
    let space = default_space();
    let run = || {
        run_study(
            &space,
            ObjectiveSpec::default(),
            KernelFamily::Matern52,
            14,
            8,
            11,
            toy_evaluator,
        )
        .unwrap()
    };
    assert_eq!(run(), run());
    let rand_run = || random_search(&space, ObjectiveSpec::default(), 20, 11, toy_evaluator).unwrap();
    assert_eq!(rand_run(), rand_run());
}

#[test]
fn incumbent_loss_non_increasing_and_consistent() {
    let space = default_space();
    let study = run_study(
        &space,
        ObjectiveSpec::scalarized(2.0, 1.0),
        KernelFamily::Matern52,
        15,
        7,
        5,
        toy_evaluator,
    )
    .unwrap();
    let trace = study.best_loss_trace();
    for w in trace.windows(2) {
        assert!(w[1] <= w[0]);
    }
    let incumbent = study.incumbent_trial().unwrap();
    let min_loss = study.trials.iter().filter_map(Trial::scalar_loss).fold(f64::INFINITY, f64::min);
    assert_eq!(incumbent.scalar_loss().unwrap(), min_loss);
    // Losses recompute from the stored objectives.
    for t in &study.trials {
        if !t.penalized {
            let expected = scalarized_cost(t.energy, t.latency, 2.0, 1.0).unwrap();
            assert_relative_eq!(t.scalar_loss().unwrap(), expected, max_relative = 1e-12);
        }
    }
}

#[test]
fn evaluator_failures_are_penalized_and_study_continues() {
    let space = default_space();
    let mut calls = 0;
    let study = run_study(
        &space,
        ObjectiveSpec::default(),
        KernelFamily::Matern52,
        12,
        6,
        2,
        |p| {
            calls += 1;
            if calls % 3 == 0 {
                Err("synthetic failure".to_string())
            } else {
                toy_evaluator(p)
            }
        },
    )
    .unwrap();
    assert_eq!(study.trials.len(), 12);
    let penalized: Vec<&Trial> = study.trials.iter().filter(|t| t.penalized).collect();
    assert_eq!(penalized.len(), 4);
    for t in penalized {
        assert_eq!(t.scalar_loss().unwrap(), study.objective.penalty);
    }
    // The incumbent never points at a penalized trial here.
    assert!(!study.incumbent_trial().unwrap().penalized);
}

#[test]
fn random_search_properties() {
    let space = default_space();
    let study = random_search(&space, ObjectiveSpec::default(), 30, 4, toy_evaluator).unwrap();
    assert_eq!(study.trials.len(), 30);
    assert!(study.trials.iter().all(|t| t.source == TrialSource::Random));
    assert!(study.kernel_family.is_none());
    let trace = study.best_loss_trace();
    for w in trace.windows(2) {
        assert!(w[1] <= w[0]);
    }
}

#[test]
fn moo_study_front_and_hypervolume_trace() {
    let space = default_space();
    let study = run_study(
        &space,
        ObjectiveSpec::multi_objective(),
        KernelFamily::Matern52,
        18,
        8,
        7,
        toy_evaluator,
    )
    .unwrap();
    assert_eq!(study.hv_trace.len(), 18);
    for w in study.hv_trace.windows(2) {
        assert!(w[1] >= w[0], "hv_trace decreased: {:?}", study.hv_trace);
    }
    let front = study.pareto.as_ref().unwrap();
    assert!(!front.is_empty());
    for w in front.members.windows(2) {
        assert!(w[0].objectives[0] < w[1].objectives[0]);
        assert!(w[0].objectives[1] > w[1].objectives[1]);
    }
    // Every front member dominates the reference point.
    let r = study.reference_point.unwrap();
    assert_eq!(front.restricted_to(&r).len(), front.len());
    // Pairs recompute from stored objectives.
    for t in &study.trials {
        if !t.penalized {
            let pair = t.objective_pair().unwrap();
            assert_relative_eq!(pair[0], t.energy.ln(), max_relative = 1e-12);
            assert_relative_eq!(pair[1], t.latency.ln(), max_relative = 1e-12);
        }
    }
}

#[test]
fn moo_penalized_trials_sit_at_the_reference_point() {
    let space = default_space();
    let mut calls = 0;
    let study = run_study(
        &space,
        ObjectiveSpec::multi_objective(),
        KernelFamily::Matern52,
        14,
        6,
        9,
        |p| {
            calls += 1;
            if calls == 2 || calls == 12 {
                Err("synthetic failure".to_string())
            } else {
                toy_evaluator(p)
            }
        },
    )
    .unwrap();
    let r = study.reference_point.unwrap().0;
    for t in study.trials.iter().filter(|t| t.penalized) {
        assert_eq!(t.objective_pair().unwrap(), r);
    }
}

#[test]
fn proposals_validate_and_tie_breaks_to_first_candidate() {
    let space = default_space();
    // Constant objective: the GP is degenerate, every candidate scores the
    // same, and the tie rule picks the first candidate = Sobol point 1 =
    // the decoded center.
    let study = run_study(
        &space,
        ObjectiveSpec::default(),
        KernelFamily::Rbf,
        6,
        5,
        1,
        |_| Ok((1.0, 1.0)),
    )
    .unwrap();
    let proposed = &study.trials[5];
    let center = crate::space::decode(&vec![0.5; space.dim()], &space).unwrap();
    assert_eq!(proposed.point, center);
}

#[test]
fn propose_next_requires_trials() {
    let space = default_space();
    let study = new_study(ObjectiveSpec::default(), Some(KernelFamily::Rbf), 10, 5, 0);
    let mut rng = crate::rng::stream_rng(0, crate::rng::Stream::Optimizer);
    assert!(matches!(
        propose_next(&study, &space, KernelFamily::Rbf, &ObjectiveSpec::default(), &mut rng),
        Err(OptError::NoTrials)
    ));
}

#[test]
fn bad_budgets_are_rejected() {
    let space = default_space();
    assert!(matches!(
        run_study(&space, ObjectiveSpec::default(), KernelFamily::Rbf, 5, 10, 0, toy_evaluator),
        Err(OptError::BadBudget { .. })
    ));
    assert!(matches!(
        run_study(&space, ObjectiveSpec::default(), KernelFamily::Rbf, 5, 0, 0, toy_evaluator),
        Err(OptError::BadBudget { .. })
    ));
    assert!(matches!(
        random_search(&space, ObjectiveSpec::default(), 0, 0, toy_evaluator),
        Err(OptError::BadBudget { .. })
    ));
}

#[test]
fn weight_scaling_preserves_the_incumbent() {
    // Scaling (beta, gamma) by c > 0 scales every loss by c and leaves the
    // argmin unchanged on a fixed trial set.
    let space = default_space();
    let seeds = [3_u64, 8, 21];
    for &seed in &seeds {
        let a = random_search(&space, ObjectiveSpec::scalarized(1.0, 2.0), 25, seed, toy_evaluator)
            .unwrap();
        let b = random_search(&space, ObjectiveSpec::scalarized(3.0, 6.0), 25, seed, toy_evaluator)
            .unwrap();
        assert_eq!(a.incumbent, b.incumbent);
        for (ta, tb) in a.trials.iter().zip(&b.trials) {
            assert_relative_eq!(
                3.0 * ta.scalar_loss().unwrap(),
                tb.scalar_loss().unwrap(),
                max_relative = 1e-12
            );
        }
    }
}

#[test]
fn trials_csv_shape() {
    let space = default_space();
    let study = run_study(
        &space,
        ObjectiveSpec::default(),
        KernelFamily::Matern52,
        8,
        5,
        2,
        toy_evaluator,
    )
    .unwrap();
    let csv = study.trials_csv(&space);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(
        lines[0],
        "index,source,penalized,freq_little_ghz,count_little,freq_medium_ghz,count_medium,freq_big_ghz,count_big,scheduler,quantum_ms,energy_j,latency_s,loss,ln_energy,ln_latency"
    );
    for line in &lines[1..] {
        assert_eq!(line.matches(',').count(), lines[0].matches(',').count());
    }
}

#[test]
fn gp_history_labels_and_cadence() {
    let space = default_space();
    let scalar = run_study(
        &space,
        ObjectiveSpec::default(),
        KernelFamily::Matern52,
        9,
        6,
        2,
        toy_evaluator,
    )
    .unwrap();
    assert_eq!(scalar.gp_history.len(), 3); // one refit per BO trial
    assert!(scalar.gp_history.iter().all(|s| s.objective_label == "loss"));
    assert_eq!(scalar.gp_history[0].length_scales.len(), space.dim());

    let moo = run_study(
        &space,
        ObjectiveSpec::multi_objective(),
        KernelFamily::Matern52,
        9,
        6,
        2,
        toy_evaluator,
    )
    .unwrap();
    assert_eq!(moo.gp_history.len(), 6); // two refits per BO trial
    let labels: Vec<&str> = moo.gp_history.iter().map(|s| s.objective_label.as_str()).collect();
    assert_eq!(&labels[..2], &["energy", "time"]);
}

#[test]
fn acquisition_argmax_brackets_the_best_observations() {
    // On a 1-D quadratic with 10 observed trials, the EI argmax should lie
    // within the interval spanned by the two best observations in most
    // seeds.
    let space = SearchSpace::new(vec![ParamDef::continuous("x", 0.0, 1.0)]).unwrap();
    let eval = |p: &DesignPoint| -> Result<(f64, f64), String> {
        let x = p.float("x").unwrap();
        Ok(((0.05 + (x - 0.6).powi(2)).exp(), 1.0))
    };
    let mut hits = 0;
    for seed in 0..10 {
        let study = random_search(&space, ObjectiveSpec::default(), 10, seed, eval).unwrap();
        let mut by_loss: Vec<(f64, f64)> = study
            .trials
            .iter()
            .map(|t| (t.scalar_loss().unwrap(), t.point.float("x").unwrap()))
            .collect();
        by_loss.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (xa, xb) = (by_loss[0].1, by_loss[1].1);
        let (lo, hi) = (xa.min(xb), xa.max(xb));

        let mut rng = crate::rng::stream_rng(seed, crate::rng::Stream::Optimizer);
        let proposed = propose_next(
            &study,
            &space,
            KernelFamily::Matern52,
            &ObjectiveSpec::default(),
            &mut rng,
        )
        .unwrap();
        let x = proposed.float("x").unwrap();
        if (lo..=hi).contains(&x) {
            hits += 1;
        }
    }
    assert!(hits >= 8, "argmax bracketed in only {hits}/10 seeds");
}

#[test]
fn bo_beats_random_on_a_toy_objective() {
    // Median best loss over seeds: BO with Matern 5/2 should do at least as
    // well as random search on the smooth toy objective.
    let space = SearchSpace::new(vec![
        ParamDef::continuous("x0", 0.0, 1.0),
        ParamDef::continuous("x1", 0.0, 1.0),
    ])
    .unwrap();
    let eval = |p: &DesignPoint| -> Result<(f64, f64), String> {
        let x0 = p.float("x0").unwrap();
        let x1 = p.float("x1").unwrap();
        // Minimum at (0.3, 0.7).
        let v = 0.1 + (x0 - 0.3).powi(2) + (x1 - 0.7).powi(2);
        Ok((v.exp(), 1.0))
    };
    let mut bo_best = Vec::new();
    let mut rs_best = Vec::new();
    for seed in 0..6 {
        let bo = run_study(
            &space,
            ObjectiveSpec::default(),
            KernelFamily::Matern52,
            24,
            6,
            seed,
            eval,
        )
        .unwrap();
        let rs = random_search(&space, ObjectiveSpec::default(), 24, seed, eval).unwrap();
        bo_best.push(bo.best_loss().unwrap());
        rs_best.push(rs.best_loss().unwrap());
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
    };
    let bo_median = median(&mut bo_best);
    let rs_median = median(&mut rs_best);
    assert!(
        bo_median <= rs_median + 1e-9,
        "BO median {bo_median} worse than random {rs_median}"
    );
}
