use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wdro::experiments::{
    generate_instance, run_experiment, sample_costs, EvaluationSample, ExperimentConfig, ExperimentKind, Method,
    TruncatedNormal,
};
use wdro::model::{Norm, RiskSpec, Selection};
use wdro::risk::solve_cvar;

/// Mean and variance of a normal law restricted to `[low, high]` by Simpson's rule.
fn integrated_moments(mean: f64, sd: f64, low: f64, high: f64) -> (f64, f64) {
    let pdf = |t: f64| (-0.5 * ((t - mean) / sd).powi(2)).exp();
    let steps = 20_000;
    let h = (high - low) / steps as f64;
    let mut m = [0.0; 3];
    for k in 0..=steps {
        let t = low + h * k as f64;
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let p = pdf(t);
        m[0] += w * p;
        m[1] += w * p * t;
        m[2] += w * p * t * t;
    }
    let mu = m[1] / m[0];
    (mu, m[2] / m[0] - mu * mu)
}

#[test]
fn truncated_normal_mean_within_three_standard_errors() {
    let laws = [
        (0.5, 0.35, 0.0, 1.4),
        (0.9, 0.63, 0.3, 0.5),
        (0.2, 0.14, 0.0, 2.0),
        // acceptance below one percent, sampled through the inverse CDF
        (0.1, 0.07, 0.4, 0.6),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let draws = 100_000;
    for (mean, sd, low, high) in laws {
        let law = TruncatedNormal::new(mean, sd, low, high).unwrap();
        let (mu, var) = integrated_moments(mean, sd, low, high);
        let total: f64 = (0..draws).map(|_| law.sample(&mut rng)).sum();
        let se = (var / draws as f64).sqrt();
        let got = total / draws as f64;
        assert!((got - mu).abs() <= 3.0 * se, "law {mean} {sd} [{low}, {high}]: {got} vs {mu} (se {se})");
    }
    assert!(TruncatedNormal::new(0.1, 0.07, 0.4, 0.6).unwrap().uses_inverse_cdf());
}

#[test]
fn zero_weight_items_are_point_masses() {
    let law = TruncatedNormal::new(0.0, 0.0, 0.0, 1.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!((0..100).all(|_| law.sample(&mut rng) == 0.0));
    assert!(TruncatedNormal::new(0.5, 0.1, 1.0, 0.0).is_err());
}

#[test]
fn instance_matches_generator_rules() {
    let inst = generate_instance(100, 5).unwrap();
    assert_eq!(inst.capacity, 0.4 * inst.weights.iter().sum::<f64>());
    for (w, law) in inst.weights.iter().zip(&inst.laws) {
        assert!((0.0..1.0).contains(w));
        assert_eq!(law.mean, *w);
        assert_eq!(law.sd, 0.7 * w);
        assert!(law.low >= 0.0 && law.low <= law.high && law.high - law.low <= 2.0);
        assert!(law.low >= w - 1.0);
    }
    let d = sample_costs(&inst, 30, 6).unwrap();
    assert_eq!((d.len(), d.dim()), (30, 100));
}

fn saa_solution(seed: u64) -> (wdro::experiments::GeneratedInstance, Selection) {
    let inst = generate_instance(40, seed).unwrap();
    let d = sample_costs(&inst, 10, seed + 1).unwrap();
    let set = inst.knapsack().unwrap().encode().unwrap();
    let x = solve_cvar(&set, &d, 0.1, 0.0).unwrap().x;
    (inst, x)
}

#[test]
fn quantile_estimates_are_stable_at_full_size() {
    let (inst, x) = saa_solution(11);
    let a = EvaluationSample::new(&inst, 100_000, 1).unwrap().quantile(&x, 0.9).unwrap();
    let b = EvaluationSample::new(&inst, 100_000, 2).unwrap().quantile(&x, 0.9).unwrap();
    assert!((a - b).abs() <= 0.01 * a.abs().max(b.abs()), "{a} vs {b}");
}

fn spread(inst: &wdro::experiments::GeneratedInstance, x: &Selection, size: usize) -> f64 {
    let q: Vec<f64> = (0..40)
        .map(|s| EvaluationSample::new(inst, size, 1000 + s).unwrap().quantile(x, 0.9).unwrap())
        .collect();
    let m = q.iter().sum::<f64>() / q.len() as f64;
    (q.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (q.len() - 1) as f64).sqrt()
}

#[test]
fn doubling_the_sample_shrinks_quantile_spread() {
    let (inst, x) = saa_solution(12);
    let small = spread(&inst, &x, 1_000);
    let large = spread(&inst, &x, 2_000);
    assert!(large < small, "spread {large} at 2000 draws vs {small} at 1000");
}

#[test]
fn presets_match_the_experiment_descriptions() {
    let e1 = ExperimentConfig::exp1(7);
    assert_eq!((e1.n, e1.sample_size, e1.samples, e1.alpha), (100, 30, 10, 0.1));
    assert_eq!(e1.norm, Norm::LInf);
    assert_eq!(e1.kind, ExperimentKind::Exp1);
    assert_eq!(e1.epsilon_grid.len(), 40);
    assert!((e1.epsilon_grid[39] - 0.1).abs() < 1e-12 && (e1.epsilon_grid[0] - 0.0025).abs() < 1e-12);
    assert_eq!(e1.mc_size, 100_000);
    let e2 = ExperimentConfig::exp2(7);
    assert_eq!(e2.alpha, 0.5);
    assert_eq!(RiskSpec::new(e2.alpha, e2.sample_size).unwrap().l, 15);
    assert!(!e2.methods.contains(&Method::RowGen));
    assert!((e2.epsilon_grid.last().unwrap() - 1.0).abs() < 1e-12);
}

fn smoke() -> ExperimentConfig {
    ExperimentConfig {
        n: 12,
        sample_size: 4,
        samples: 2,
        alpha: 0.25,
        epsilon_grid: vec![0.0, 0.02, 0.05, 0.1],
        mc_size: 1_000,
        ..ExperimentConfig::exp1(3)
    }
}

#[test]
fn smoke_sweep_runs_end_to_end() {
    let res = run_experiment(&smoke(), Some(2)).unwrap();
    assert_eq!(res.mc_size, 1_000);
    // SAA once per sample plus two methods on four radii
    assert_eq!(res.records.len(), 2 * (1 + 2 * 4));
    for r in &res.records {
        assert!(r.q90.is_some(), "{:?}", r.status);
    }
    for w in res.records.windows(2) {
        let key = |r: &wdro::experiments::SweepRecord| (r.sample_id, r.epsilon, r.method);
        assert!(key(&w[0]) <= key(&w[1]));
    }
    let dir = tempfile::tempdir().unwrap();
    let files = res.write_outputs(dir.path(), true).unwrap();
    assert_eq!(files.len(), 2 + 2 + 1);
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert!(csv.starts_with("sample_id,epsilon,method,objective,q90,solve_ms,status\n"));
    assert!(csv.lines().nth(1).unwrap().split(',').nth(5).is_some_and(|ms| !ms.is_empty()));
    assert!(std::fs::read_to_string(dir.path().join("aggregate.svg")).unwrap().contains("<svg"));
}

#[test]
fn zero_radius_reproduces_saa() {
    let res = run_experiment(&smoke(), Some(1)).unwrap();
    for s in 0..2 {
        let saa = res.records.iter().find(|r| r.sample_id == s && r.method == Method::Saa).unwrap();
        for r in res.records.iter().filter(|r| r.sample_id == s && r.epsilon == 0.0) {
            assert!((r.objective.unwrap() - saa.objective.unwrap()).abs() <= 1e-9);
        }
    }
}

#[test]
fn failures_are_recorded_per_cell() {
    // alpha = 0.1 is not a multiple of 1/4: row generation rejects it, the distortion does not
    let cfg = ExperimentConfig {
        alpha: 0.1,
        epsilon_grid: vec![0.05],
        ..smoke()
    };
    let res = run_experiment(&cfg, Some(1)).unwrap();
    let failed: Vec<_> = res.records.iter().filter(|r| r.q90.is_none()).collect();
    assert_eq!(failed.len(), 2);
    assert!(failed.iter().all(|r| r.method == Method::RowGen && r.status.starts_with("error")));
}
