use proptest::prelude::*;

use wdro::milp::{resolve_with_added_rows, solve_lp, solve_mixed, LinearProgram, MixedModel, Relation, Row, Status};

fn relation(k: u8) -> Relation {
    [Relation::Le, Relation::Ge, Relation::Eq][k as usize % 3]
}

/// `min c x` over `{0,1}^n` with the given rows, by scanning every point.
fn enumerate(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    (0u32..1 << n)
        .map(|m| (0..n).map(|j| f64::from(m >> j & 1)).collect::<Vec<f64>>())
        .filter(|x| lp.rows.iter().all(|r| r.is_satisfied(x, 1e-9)))
        .map(|x| lp.objective_value(&x))
        .reduce(f64::min)
}

fn build(n: usize, objective: Vec<i32>, rows: Vec<(Vec<i32>, u8, i32)>) -> LinearProgram {
    let mut lp = LinearProgram::new(n);
    lp.objective = objective.iter().map(|&c| f64::from(c)).collect();
    for (coef, rel, rhs) in rows {
        lp.add_row(coef.iter().map(|&a| f64::from(a)).collect(), relation(rel), f64::from(rhs));
    }
    lp
}

fn program() -> impl Strategy<Value = LinearProgram> {
    (1usize..=8).prop_flat_map(|n| {
        (
            prop::collection::vec(-9i32..=9, n),
            prop::collection::vec((prop::collection::vec(-5i32..=5, n), 0u8..3, -6i32..=8), 0..4),
        )
            .prop_map(move |(c, rows)| build(n, c, rows))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn binary_programs_match_enumeration(lp in program()) {
        let n = lp.num_vars();
        let model = MixedModel::new(lp.clone(), (0..n).collect()).unwrap();
        let report = solve_mixed(&model, 0.0).unwrap();
        match enumerate(&lp) {
            None => prop_assert_eq!(report.status, Status::Infeasible),
            Some(best) => {
                prop_assert_eq!(report.status, Status::Optimal);
                prop_assert!((report.objective - best).abs() <= 1e-7, "{} vs {}", report.objective, best);
                prop_assert!(model.is_integral(&report.values));
                prop_assert!(lp.is_feasible(&report.values, 1e-7));
                prop_assert!(report.best_bound <= best + 1e-7);
            }
        }
    }

    #[test]
    fn relaxation_bounds_the_binary_optimum(lp in program()) {
        let n = lp.num_vars();
        let mut relaxed = lp.clone();
        for j in 0..n {
            relaxed.set_bounds(j, 0.0, 1.0);
        }
        let r = solve_lp(&relaxed).unwrap();
        if let Some(best) = enumerate(&lp) {
            prop_assert_eq!(r.status, Status::Optimal);
            prop_assert!(r.objective <= best + 1e-7);
            prop_assert!(relaxed.is_feasible(&r.values, 1e-7));
        }
    }

    /// `max v x  s.t.  w x <= W, 0 <= x <= 1` is solved by taking items in
    /// decreasing `v/w` order and splitting the last one.
    #[test]
    fn fractional_knapsack_is_greedy(
        items in prop::collection::vec((0.1f64..5.0, 0.1f64..5.0), 1..12),
        frac in 0.0f64..1.0,
    ) {
        let n = items.len();
        let cap = frac * items.iter().map(|i| i.1).sum::<f64>();
        let mut lp = LinearProgram::new(n);
        lp.objective = items.iter().map(|i| -i.0).collect();
        lp.add_row(items.iter().map(|i| i.1).collect(), Relation::Le, cap);
        for j in 0..n {
            lp.set_bounds(j, 0.0, 1.0);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| (items[b].0 / items[b].1).total_cmp(&(items[a].0 / items[a].1)));
        let (mut left, mut value) = (cap, 0.0);
        for j in order {
            let take = (left / items[j].1).min(1.0);
            value += take * items[j].0;
            left -= take * items[j].1;
            if left <= 0.0 {
                break;
            }
        }
        let r = solve_lp(&lp).unwrap();
        prop_assert_eq!(r.status, Status::Optimal);
        prop_assert!((-r.objective - value).abs() <= 1e-8 * (1.0 + value));
    }

    #[test]
    fn added_rows_equal_rebuilt_model(lp in program(), extra in prop::collection::vec(-5i32..=5, 8), rhs in -3i32..=6) {
        let n = lp.num_vars();
        let row = Row::new(extra[..n].iter().map(|&a| f64::from(a)).collect(), Relation::Le, f64::from(rhs));
        let model = MixedModel::new(lp.clone(), (0..n).collect()).unwrap();
        let mut full = lp.clone();
        full.rows.push(row.clone());
        let a = resolve_with_added_rows(&model, vec![row], 0.0, Some(vec![true; n])).unwrap();
        let b = solve_mixed(&MixedModel::new(full, (0..n).collect()).unwrap(), 0.0).unwrap();
        prop_assert_eq!(a.status, b.status);
        if b.status == Status::Optimal {
            prop_assert!((a.objective - b.objective).abs() <= 1e-7);
        }
    }
}

#[test]
fn unbounded_and_infeasible_lps() {
    let mut lp = LinearProgram::new(2);
    lp.objective = vec![-1.0, 0.0];
    lp.add_row(vec![1.0, -1.0], Relation::Le, 1.0);
    assert_eq!(solve_lp(&lp).unwrap().status, Status::Unbounded);
    let mut lp = LinearProgram::new(1);
    lp.add_row(vec![1.0], Relation::Ge, 2.0);
    lp.set_bounds(0, 0.0, 1.0);
    assert_eq!(solve_lp(&lp).unwrap().status, Status::Infeasible);
}

/// A classic cycling example for textbook Dantzig pivoting.
#[test]
fn degenerate_lp_terminates() {
    let mut lp = LinearProgram::new(4);
    lp.objective = vec![-0.75, 150.0, -0.02, 6.0];
    lp.add_row(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
    lp.add_row(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
    lp.add_row(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
    let r = solve_lp(&lp).unwrap();
    assert_eq!(r.status, Status::Optimal);
    assert!((r.objective + 0.05).abs() < 1e-9, "{}", r.objective);
}
