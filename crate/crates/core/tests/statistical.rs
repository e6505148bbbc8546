//! Distributional checks on the stochastic components: exponential
//! inter-arrivals, uniform attribute marginals, and Sobol space-filling.

use schedtune::rng::{stream_rng, Stream};
use schedtune::space::{default_space, random_sample};
use schedtune::workload::{generate_tasks, sample_arrivals, WorkloadSpec};

/// Chi-squared critical value at alpha = 0.01 for 3 degrees of freedom.
const CHI2_CRIT_DOF3: f64 = 11.345;
/// Chi-squared critical value at alpha = 0.01 for 2 degrees of freedom.
const CHI2_CRIT_DOF2: f64 = 9.210;
/// Kolmogorov-Smirnov critical coefficient at alpha = 0.01 (asymptotic):
/// reject when D > 1.6276 / sqrt(n).
const KS_CRIT_COEFF: f64 = 1.6276;

#[test]
fn mean_inter_arrival_close_to_inverse_rate() {
    // rate 1000/s: sample mean gap within [0.9, 1.1] ms on >= 9/10 seeds.
    let mut passes = 0;
    for seed in 0..10 {
        let mut rng = stream_rng(seed, Stream::Arrivals);
        let times = sample_arrivals(1000.0, 1.0, 1_000_000, &mut rng).unwrap();
        let mut prev = 0.0;
        let gaps: Vec<f64> = times
            .iter()
            .map(|&t| {
                let g = t - prev;
                prev = t;
                g
            })
            .collect();
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        if (0.9e-3..=1.1e-3).contains(&mean) {
            passes += 1;
        }
    }
    assert!(passes >= 9, "mean gap in range on only {passes}/10 seeds");
}

#[test]
fn inter_arrivals_pass_ks_against_exponential() {
    let rate = 1000.0;
    let mut passes = 0;
    for seed in 0..10 {
        let mut rng = stream_rng(1000 + seed, Stream::Arrivals);
        let times = sample_arrivals(rate, 1.0, 1_000_000, &mut rng).unwrap();
        let mut prev = 0.0;
        let mut gaps: Vec<f64> = times
            .iter()
            .map(|&t| {
                let g = t - prev;
                prev = t;
                g
            })
            .collect();
        gaps.sort_by(f64::total_cmp);
        let n = gaps.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &g) in gaps.iter().enumerate() {
            let cdf = 1.0 - (-rate * g).exp();
            let hi = (i + 1) as f64 / n - cdf;
            let lo = cdf - i as f64 / n;
            d = d.max(hi.max(lo));
        }
        if d <= KS_CRIT_COEFF / n.sqrt() {
            passes += 1;
        }
    }
    assert!(passes >= 9, "KS accepted on only {passes}/10 seeds");
}

#[test]
fn priority_histogram_uniform_by_chi_squared() {
    // K = 3 (four levels), 10^4 tasks: chi-squared with 3 dof at alpha 0.01.
    let spec = WorkloadSpec {
        arrival_rate: 100_000.0,
        max_tasks: 10_000,
        horizon: 10.0,
        priority_levels: 3,
        ..WorkloadSpec::default()
    };
    let set = generate_tasks(&spec, 77).unwrap();
    assert_eq!(set.len(), 10_000);
    let mut counts = [0u32; 4];
    for t in &set.tasks {
        counts[t.priority as usize] += 1;
    }
    let expected = 2500.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    assert!(chi2 < CHI2_CRIT_DOF3, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn scheduler_marginal_uniform_by_chi_squared() {
    let space = default_space();
    let mut rng = stream_rng(5, Stream::Optimizer);
    let mut counts = std::collections::BTreeMap::new();
    let n = 10_000;
    for _ in 0..n {
        let p = random_sample(&space, &mut rng);
        *counts.entry(p.cat("scheduler").unwrap().to_string()).or_insert(0u32) += 1;
    }
    assert_eq!(counts.len(), 3);
    let expected = n as f64 / 3.0;
    let chi2: f64 = counts
        .values()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    assert!(chi2 < CHI2_CRIT_DOF2, "chi2 = {chi2}, counts {counts:?}");
}

/// Warnock's closed form for the squared L2 star discrepancy.
fn l2_star_discrepancy_sq(points: &[Vec<f64>]) -> f64 {
    let n = points.len() as f64;
    let d = points[0].len() as u32;
    let mut single = 0.0;
    for p in points {
        single += p.iter().map(|&x| (1.0 - x * x) / 2.0).product::<f64>();
    }
    let mut pair = 0.0;
    for a in points {
        for b in points {
            pair += a
                .iter()
                .zip(b)
                .map(|(&x, &y)| 1.0 - x.max(y))
                .product::<f64>();
        }
    }
    (1.0_f64 / 3.0).powi(d as i32) - 2.0 / n * single + pair / (n * n)
}

#[test]
fn sobol_beats_uniform_on_l2_star_discrepancy() {
    // The first 128 raw Sobol vectors at the encoded dimension of the
    // default space against 128 uniform points, majority over 10 seeds.
    let space = default_space();
    let mut seq = schedtune::space::sobol::SobolSequence::new(space.dim()).unwrap();
    let sobol_points: Vec<Vec<f64>> = (0..128).map(|_| seq.next_point()).collect();
    let sobol_d2 = l2_star_discrepancy_sq(&sobol_points);

    let mut wins = 0;
    for seed in 0..10 {
        let mut rng = stream_rng(seed, Stream::Optimizer);
        let uniform: Vec<Vec<f64>> = (0..128)
            .map(|_| (0..space.dim()).map(|_| rand::Rng::random::<f64>(&mut rng)).collect())
            .collect();
        if sobol_d2 < l2_star_discrepancy_sq(&uniform) {
            wins += 1;
        }
    }
    assert!(wins >= 6, "Sobol beat uniform on only {wins}/10 seeds");
}
