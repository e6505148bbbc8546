use super::*;
use crate::rng::{stream_rng, Stream};
use approx::assert_relative_eq;
use proptest::prelude::*;

#[test]
fn default_space_matches_published_bounds() {
    let space = default_space();
    assert_eq!(space.params.len(), 8);
    assert_eq!(space.dim(), 10); // 4 continuous + 3 integer + 3 one-hot

    let quantum = space.param("quantum_ms").unwrap();
    assert_eq!(quantum.kind, ParamKind::Continuous { lo: 0.5, hi: 5.0 });
    assert_eq!(
        quantum.conditional_on,
        Some(("scheduler".into(), vec!["RR".into(), "Priority".into()]))
    );
    assert_eq!(
        space.param("freq_big_ghz").unwrap().kind,
        ParamKind::Continuous { lo: 1.5, hi: 3.5 }
    );
    assert_eq!(
        space.param("freq_little_ghz").unwrap().kind,
        ParamKind::Continuous { lo: 0.5, hi: 1.5 }
    );
    assert_eq!(
        space.param("freq_medium_ghz").unwrap().kind,
        ParamKind::Continuous { lo: 1.0, hi: 2.5 }
    );
    for count in ["count_little", "count_medium", "count_big"] {
        assert_eq!(space.param(count).unwrap().kind, ParamKind::Integer { lo: 0, hi: 4 });
    }
}

fn fcfs_point() -> DesignPoint {
    DesignPoint {
        values: vec![
            ("freq_little_ghz".into(), ParamValue::Float(1.0)),
            ("count_little".into(), ParamValue::Int(2)),
            ("freq_medium_ghz".into(), ParamValue::Float(1.75)),
            ("count_medium".into(), ParamValue::Int(0)),
            ("freq_big_ghz".into(), ParamValue::Float(2.5)),
            ("count_big".into(), ParamValue::Int(1)),
            ("scheduler".into(), ParamValue::Cat("FCFS".into())),
        ],
    }
}

#[test]
fn encode_scales_and_one_hots() {
    let space = default_space();
    let mut point = fcfs_point();
    point.values[6].1 = ParamValue::Cat("RR".into());
    point.set("quantum_ms", ParamValue::Float(2.75));
    let coords = encode(&point, &space).unwrap();
    assert_relative_eq!(coords[0], 0.5); // freq_little 1.0 in [0.5, 1.5]
    assert_relative_eq!(coords[1], 0.5); // count 2 in {0..4}
    assert_eq!(&coords[6..9], &[0.0, 1.0, 0.0]); // one-hot RR
    assert_relative_eq!(coords[9], 0.5); // quantum 2.75 in [0.5, 5.0]
}

#[test]
fn suppressed_conditional_encodes_mid_range() {
    let space = default_space();
    let coords = encode(&fcfs_point(), &space).unwrap();
    assert_eq!(coords.len(), 10);
    assert_eq!(coords[9], 0.5);
}

#[test]
fn decode_of_all_half_vector() {
    let space = default_space();
    let point = decode(&vec![0.5; 10], &space).unwrap();
    assert_relative_eq!(point.float("freq_little_ghz").unwrap(), 1.0);
    assert_relative_eq!(point.float("freq_medium_ghz").unwrap(), 1.75);
    assert_relative_eq!(point.float("freq_big_ghz").unwrap(), 2.5);
    for count in ["count_little", "count_medium", "count_big"] {
        assert_eq!(point.int(count).unwrap(), 2);
    }
    // One-hot tie resolves to the lowest option index.
    assert_eq!(point.cat("scheduler").unwrap(), "FCFS");
    // FCFS suppresses the quantum.
    assert!(point.get("quantum_ms").is_none());
}

#[test]
fn integer_rounding() {
    let space = default_space();
    let mut v = vec![0.5; 10];
    v[1] = 0.49; // count_little: round(0.49 * 4) = round(1.96) = 2
    let point = decode(&v, &space).unwrap();
    assert_eq!(point.int("count_little").unwrap(), 2);
    v[1] = 0.1; // round(0.4) = 0
    let point = decode(&v, &space).unwrap();
    assert_eq!(point.int("count_little").unwrap(), 0);
}

#[test]
fn zero_count_repair_bumps_largest_coordinate() {
    let space = default_space();
    let mut v = vec![0.5; 10];
    v[1] = 0.02; // little
    v[3] = 0.1; // medium <- largest among counts
    v[5] = 0.05; // big
    let point = decode(&v, &space).unwrap();
    assert_eq!(point.int("count_little").unwrap(), 0);
    assert_eq!(point.int("count_medium").unwrap(), 1);
    assert_eq!(point.int("count_big").unwrap(), 0);
    assert!(validate(&point, &space).is_empty());
}

#[test]
fn decode_rejects_wrong_dimension() {
    let space = default_space();
    assert_eq!(
        decode(&vec![0.5; 9], &space).unwrap_err(),
        SpaceError::DimensionMismatch { expected: 10, got: 9 }
    );
}

#[test]
fn validate_reports_all_violations() {
    let space = default_space();
    let mut point = fcfs_point();
    point.values[4].1 = ParamValue::Float(4.0); // freq_big above 3.5
    point.set("quantum_ms", ParamValue::Float(1.0)); // FCFS must not carry quantum
    let violations = validate(&point, &space);
    assert_eq!(violations.len(), 2);
    assert!(violations.iter().any(|v| v.contains("freq_big_ghz")));
    assert!(violations.iter().any(|v| v.contains("quantum_ms")));
}

#[test]
fn validate_rejects_all_zero_counts() {
    let space = default_space();
    let mut point = fcfs_point();
    point.values[1].1 = ParamValue::Int(0);
    point.values[5].1 = ParamValue::Int(0);
    let violations = validate(&point, &space);
    assert_eq!(violations.len(), 1);
    assert!(violations[0].contains("core counts"));
}

#[test]
fn sobol_first_point_is_decoded_center() {
    let space = default_space();
    assert!(sobol_sample(0, &space).unwrap().is_empty());
    let pts = sobol_sample(3, &space).unwrap();
    assert_eq!(pts[0], decode(&vec![0.5; 10], &space).unwrap());
}

#[test]
fn sobol_prefix_property() {
    let space = default_space();
    let long = sobol_sample(32, &space).unwrap();
    let short = sobol_sample(10, &space).unwrap();
    assert_eq!(&long[..10], &short[..]);
}

#[test]
fn sobol_samples_validate() {
    let space = default_space();
    for p in sobol_sample(128, &space).unwrap() {
        assert!(validate(&p, &space).is_empty(), "invalid sobol point {p:?}");
    }
}

#[test]
fn repair_rule_never_fires_on_sampler_output() {
    // random_sample rejects all-zero counts outright, and the first 128
    // Sobol vectors never round all counts to zero, so the decode repair
    // stays a defense for adversarial vectors only.
    let space = default_space();
    let mut seq = crate::space::sobol::SobolSequence::new(space.dim()).unwrap();
    for _ in 0..128 {
        let raw = seq.next_point();
        // Count coordinates sit at offsets 1, 3, 5 of the encoded layout.
        let zero_counts = [1_usize, 3, 5]
            .iter()
            .all(|&o| (raw[o] * 4.0).round() as i64 == 0);
        assert!(!zero_counts, "sobol vector would need the repair rule: {raw:?}");
    }
    let mut rng = stream_rng(41, Stream::Optimizer);
    for _ in 0..2000 {
        let p = random_sample(&space, &mut rng);
        let total: i64 = ["count_little", "count_medium", "count_big"]
            .iter()
            .map(|c| p.int(c).unwrap())
            .sum();
        assert!(total >= 1);
    }
}

#[test]
fn random_samples_validate_and_are_deterministic() {
    let space = default_space();
    let mut rng = stream_rng(3, Stream::Optimizer);
    for _ in 0..2000 {
        let p = random_sample(&space, &mut rng);
        assert!(validate(&p, &space).is_empty(), "invalid random point {p:?}");
    }
    let mut a = stream_rng(9, Stream::Optimizer);
    let mut b = stream_rng(9, Stream::Optimizer);
    assert_eq!(random_sample(&space, &mut a), random_sample(&space, &mut b));
}

#[test]
fn design_point_json_round_trip() {
    let point = fcfs_point();
    let json = serde_json::to_string(&point).unwrap();
    assert!(json.starts_with('{'));
    let back: DesignPoint = serde_json::from_str(&json).unwrap();
    assert_eq!(point, back);
}

#[test]
fn space_definition_validation() {
    assert!(SearchSpace::new(vec![]).is_err());
    assert!(SearchSpace::new(vec![ParamDef::continuous("x", 1.0, 1.0)]).is_err());
    assert!(SearchSpace::new(vec![ParamDef::categorical("c", &["only"])]).is_err());
    assert!(SearchSpace::new(vec![
        ParamDef::continuous("x", 0.0, 1.0),
        ParamDef::continuous("x", 0.0, 1.0),
    ])
    .is_err());
    // Conditional must reference an earlier categorical.
    assert!(SearchSpace::new(vec![
        ParamDef::continuous("q", 0.0, 1.0).conditional("missing", &["A"])
    ])
    .is_err());
}

/// Equality up to fp rounding on continuous values; exact elsewhere.
fn points_agree(a: &DesignPoint, b: &DesignPoint) -> bool {
    a.values.len() == b.values.len()
        && a.values.iter().all(|(name, value)| match value {
            ParamValue::Float(x) => b
                .float(name)
                .is_some_and(|y| (y - x).abs() <= 1e-12 * x.abs().max(1.0)),
            other => b.get(name) == Some(other),
        })
}

proptest! {
    // decode . encode . decode == decode on the decoded lattice (continuous
    // coordinates up to fp rounding of the affine round trip).
    #[test]
    fn encode_decode_idempotent_on_lattice(raw in prop::collection::vec(0.0f64..1.0, 10)) {
        let space = default_space();
        let point = decode(&raw, &space).unwrap();
        let coords = encode(&point, &space).unwrap();
        prop_assert!(coords.iter().all(|&c| (0.0..=1.0).contains(&c)));
        let again = decode(&coords, &space).unwrap();
        prop_assert!(points_agree(&point, &again), "{point:?} vs {again:?}");
    }

    #[test]
    fn random_points_round_trip(seed in 0u64..500) {
        let space = default_space();
        let mut rng = stream_rng(seed, Stream::Optimizer);
        let point = random_sample(&space, &mut rng);
        let decoded = decode(&encode(&point, &space).unwrap(), &space).unwrap();
        prop_assert!(points_agree(&point, &decoded), "{point:?} vs {decoded:?}");
    }
}
