//! The distorted-sample approximation: move every sample towards a bad support
//! point, solve the empirical problem and report the certified ratio.

use wdro::distort::{solve_distr_approx, solve_with_custom_c};
use wdro::experiments::{generate_instance, sample_costs};
use wdro::model::{AmbiguitySpec, Norm, RiskSpec};
use wdro::worst_case::worst_distribution;

fn main() -> wdro::Result<()> {
    let inst = generate_instance(20, 3)?;
    let set = inst.knapsack()?.encode()?;
    let dist = sample_costs(&inst, 8, 4)?;
    let support = inst.support()?;
    let risk = RiskSpec::new(0.25, 8)?;
    for eps in [0.01, 0.05, 0.2, 1.0] {
        let spec = AmbiguitySpec::new(eps, Norm::LInf)?;
        let sol = solve_distr_approx(&set, &dist, &support, &spec, &risk, 0.0)?;
        let worst = worst_distribution(&sol.report.x, &dist, &support, &spec, &risk)?;
        println!(
            "eps = {eps:<4} c = {:>7.3}  certified ratio {:>7.3}  worst-case CVaR of x' {:.4}",
            sol.plan.c,
            sol.certified_ratio.unwrap_or(f64::NAN),
            worst.value
        );
    }
    // any c >= 1 gives a heuristic between the sample (c = inf) and the corner (c = 1)
    for c in [1.0, 2.0, 10.0, f64::INFINITY] {
        let rep = solve_with_custom_c(&set, &dist, &support, c, &risk, 0.0)?;
        println!("c = {c:<4} picks {:?}", rep.x.indices().collect::<Vec<_>>());
    }
    Ok(())
}
