mod common;

use rand::Rng;

use common::*;
use wdro::distort::{solve_distr_approx, solve_distr_approx_with, solve_with_custom_c, XiBarStrategy};
use wdro::model::{AmbiguitySpec, EmpiricalDistribution, Norm, RiskSpec, Selection, SupportSet};
use wdro::problems::{rs_to_shortest_path, DagShortestPathInstance, RepSelectionInstance};
use wdro::risk::solve_cvar;
use wdro::rowgen::{solve_distr_rowgen, Termination};
use wdro::unrestricted::{solve_distr_unrestricted, solve_expectation_unrestricted};
use wdro::worst_case::worst_distribution;

#[test]
fn l2_unrestricted_matches_enumeration() {
    let mut r = rng(31);
    for case in 0..40 {
        let n = r.random_range(2..=10);
        let big_n = r.random_range(1..=4);
        let prob = random_problem(&mut r, n);
        let dist = random_dist(&mut r, n, big_n);
        let alpha = r.random_range(0.1..1.0);
        let eps = r.random_range(0.0..1.0);
        let spec = AmbiguitySpec::new(eps, Norm::L2).unwrap();
        let rep = solve_distr_unrestricted(&prob.set, &dist, &spec, alpha, 0.0).unwrap();
        let (_, best) = brute_min(&prob.points(), |x| worst_unrestricted(&dist, x, alpha, eps, Norm::L2));
        assert!(close(rep.objective, best, 1e-7), "case {case}: {} vs {best}", rep.objective);
    }
}

#[test]
fn expectation_matches_enumeration() {
    let mut r = rng(32);
    for case in 0..40 {
        let n = r.random_range(2..=10);
        let prob = random_problem(&mut r, n);
        let big_n = r.random_range(1..=4);
        let dist = random_dist(&mut r, n, big_n);
        let norm = [Norm::L1, Norm::L2, Norm::LInf][case % 3];
        let eps = r.random_range(0.0..1.0);
        let spec = AmbiguitySpec::new(eps, norm).unwrap();
        let rep = solve_expectation_unrestricted(&prob.set, &dist, &spec, 0.0).unwrap();
        let mean = dist.mean();
        let (_, best) = brute_min(&prob.points(), |x| x.cost(&mean) + eps * dual_norm(norm, x));
        assert!(close(rep.objective, best, 1e-9), "case {case}: {} vs {best}", rep.objective);
    }
}

#[test]
fn rowgen_on_polytopes_and_l2_boxes() {
    let mut r = rng(33);
    for case in 0..16 {
        let n = r.random_range(2..=6);
        let big_n = r.random_range(1..=3);
        let prob = random_problem(&mut r, n);
        let dist = random_dist(&mut r, n, big_n);
        let l = r.random_range(1..=big_n);
        let risk = RiskSpec::new(l as f64 / big_n as f64, big_n).unwrap();
        let eps = r.random_range(0.05..0.5);
        let (support, norm) = if case % 2 == 0 {
            (polytope_around(&mut r, &dist), if case % 4 == 0 { Norm::L1 } else { Norm::LInf })
        } else {
            let (lo, hi) = box_around(&mut r, &dist);
            (SupportSet::boxed(lo, hi).unwrap(), Norm::L2)
        };
        let spec = AmbiguitySpec::new(eps, norm).unwrap();
        let (rep, trace) = solve_distr_rowgen(&prob.set, &dist, &support, &spec, &risk, 1e-6, 200).unwrap();
        let value = |x: &Selection| worst_distribution(x, &dist, &support, &spec, &risk).unwrap().value;
        let (_, best) = brute_min(&prob.points(), value);
        assert!(rep.objective >= best - 1e-6, "case {case}: below the optimum");
        if trace.termination == Termination::GapClosed {
            assert!(rep.objective <= best * (1.0 + 1e-5) + 1e-9, "case {case}: {} vs {best}", rep.objective);
        }
        assert!(rep.best_bound <= best + 1e-6, "case {case}: lower bound {} above {best}", rep.best_bound);
    }
}

#[test]
fn distortion_on_polytopes_respects_certificate() {
    let mut r = rng(34);
    for case in 0..20 {
        let n = r.random_range(2..=4);
        let big_n = r.random_range(1..=3);
        let prob = random_problem(&mut r, n);
        let dist = random_dist(&mut r, n, big_n);
        let support = polytope_around(&mut r, &dist);
        let l = r.random_range(1..=big_n);
        let risk = RiskSpec::new(l as f64 / big_n as f64, big_n).unwrap();
        let norm = if case % 2 == 0 { Norm::L1 } else { Norm::LInf };
        let spec = AmbiguitySpec::new(r.random_range(0.05..0.5), norm).unwrap();
        for strategy in [XiBarStrategy::MaxSum, XiBarStrategy::ClosestToZeta] {
            let sol = solve_distr_approx_with(&prob.set, &dist, &support, &spec, &risk, 0.0, strategy).unwrap();
            for row in sol.plan.distorted.realizations() {
                assert!(support.contains(row, 1e-7));
            }
            // every point moves at most N eps / l
            for (moved, hat) in sol.plan.distorted.realizations().iter().zip(dist.realizations()) {
                let step: Vec<f64> = moved.iter().zip(hat).map(|(a, b)| a - b).collect();
                assert!(norm.eval(&step) <= spec.budget(big_n) / l as f64 + 1e-7);
            }
            let value = worst_bounded(&sol.report.x, &dist, &support, spec.epsilon, norm, l);
            let (_, best) = brute_min(&prob.points(), |x| worst_bounded(x, &dist, &support, spec.epsilon, norm, l));
            if let Some(ratio) = sol.certified_ratio {
                assert!(value <= ratio * best + 1e-6, "case {case}: {value} > {ratio} * {best}");
            }
        }
    }
}

#[test]
fn custom_c_interpolates_between_sample_and_target() {
    let mut r = rng(35);
    for _ in 0..20 {
        let n = r.random_range(2..=8);
        let prob = random_problem(&mut r, n);
        let dist = random_dist(&mut r, n, 3);
        let (lo, hi) = box_around(&mut r, &dist);
        let support = SupportSet::boxed(lo, hi.clone()).unwrap();
        let risk = RiskSpec::new(2.0 / 3.0, 3).unwrap();
        let kept = solve_with_custom_c(&prob.set, &dist, &support, f64::INFINITY, &risk, 0.0).unwrap();
        let saa = solve_cvar(&prob.set, &dist, risk.alpha, 0.0).unwrap();
        assert!(close(kept.objective, saa.objective, 1e-9));
        // c = 1 replaces every sample by the upper corner
        let corner = solve_with_custom_c(&prob.set, &dist, &support, 1.0, &risk, 0.0).unwrap();
        let (_, best) = brute_min(&prob.points(), |x| x.cost(&hi));
        assert!(close(corner.objective, best, 1e-9));
        assert!(solve_with_custom_c(&prob.set, &dist, &support, 0.5, &risk, 0.0).is_err());
    }
}

#[test]
fn approximation_needs_bounded_support_and_member_samples() {
    let prob = random_knapsack(&mut rng(36), 3);
    let dist = EmpiricalDistribution::new(vec![vec![1.0, 2.0, 3.0]]).unwrap();
    let spec = AmbiguitySpec::new(0.1, Norm::L1).unwrap();
    let risk = RiskSpec::new(1.0, 1).unwrap();
    let err = solve_distr_approx(&prob.set, &dist, &SupportSet::Unrestricted, &spec, &risk, 0.0).unwrap_err();
    assert!(err.is_input_error());
    let tight = SupportSet::boxed(vec![0.0; 3], vec![1.0; 3]).unwrap();
    assert!(solve_distr_approx(&prob.set, &dist, &tight, &spec, &risk, 0.0).unwrap_err().is_input_error());
}

/// Arc vectors that trace one source-sink path, found by walking the selected arcs.
fn is_path(inst: &DagShortestPathInstance, x: &Selection) -> bool {
    let mut at = inst.source;
    let mut used = 0;
    while at != inst.sink {
        let out: Vec<usize> = (0..inst.arcs.len()).filter(|&k| x.get(k) && inst.arcs[k].0 == at).collect();
        if out.len() != 1 {
            return false;
        }
        at = inst.arcs[out[0]].1;
        used += 1;
    }
    used == x.cardinality()
}

#[test]
fn shortest_path_cvar_matches_path_enumeration() {
    let mut r = rng(37);
    for case in 0..30 {
        let v = r.random_range(3..=6);
        let mut arcs = vec![(0, v - 1)];
        let m = r.random_range(3..=10);
        while arcs.len() < m {
            let a = r.random_range(0..v - 1);
            let b = r.random_range(a + 1..v);
            arcs.push((a, b));
        }
        let inst = DagShortestPathInstance::new(v, arcs, 0, v - 1).unwrap();
        let set = inst.encode().unwrap();
        let n = inst.n();
        let big_n = r.random_range(1..=4);
        let dist = random_dist(&mut r, n, big_n);
        let alpha = r.random_range(0.1..1.0);
        let paths: Vec<Selection> = (0u32..1 << n)
            .map(|m| Selection::new((0..n).map(|j| m >> j & 1 == 1).collect()))
            .filter(|x| is_path(&inst, x))
            .collect();
        let rep = solve_cvar(&set, &dist, alpha, 0.0).unwrap();
        assert!(is_path(&inst, &rep.x), "case {case}: not a path");
        let (_, best) = brute_min(&paths, |x| cvar(&dist, x, alpha));
        assert!(close(rep.objective, best, 1e-9), "case {case}: {} vs {best}", rep.objective);
    }
}

#[test]
fn selection_and_layered_paths_have_equal_costs() {
    let mut r = rng(38);
    for _ in 0..20 {
        let n = r.random_range(2..=8);
        let k = r.random_range(1..=n.min(4));
        let rs = RepSelectionInstance::new(random_groups(&mut r, n, k)).unwrap();
        let sp = rs_to_shortest_path(&rs);
        let cost: Vec<f64> = (0..n).map(|_| r.random_range(0.0..5.0)).collect();
        let (_, a) = rs.solve_det(&cost).unwrap();
        let (_, b) = sp.solve_det(&cost).unwrap();
        assert!(close(a, b, 1e-12));
    }
}
