//! Box support with the 1-norm and `alpha = l/N`: two deterministic solves give
//! the robust optimum. Row generation is run on the same instance as a check.

use wdro::experiments::{generate_instance, sample_costs};
use wdro::model::{AmbiguitySpec, Norm, RiskSpec, SupportSet};
use wdro::rowgen::solve_distr_rowgen;
use wdro::unrestricted::solve_box_q1_two_solve;

fn main() -> wdro::Result<()> {
    let inst = generate_instance(15, 4)?;
    let set = inst.knapsack()?.encode()?;
    let dist = sample_costs(&inst, 6, 5)?;
    let support = inst.support()?;
    let SupportSet::Box { upper, .. } = &support else { unreachable!() };
    let alpha = 2.0 / 6.0;
    let risk = RiskSpec::new(alpha, 6)?;
    for eps in [0.0, 0.02, 0.1, 0.5, 2.0] {
        let two = solve_box_q1_two_solve(&set, &dist, upper, eps, alpha, 0.0)?;
        let (rg, trace) = solve_distr_rowgen(&set, &dist, &support, &AmbiguitySpec::new(eps, Norm::L1)?, &risk, 1e-6, 100)?;
        println!(
            "eps = {eps:<4} two-solve {:.5}  row generation {:.5} ({} iterations)",
            two.objective,
            rg.objective,
            trace.iterations.len()
        );
    }
    Ok(())
}
