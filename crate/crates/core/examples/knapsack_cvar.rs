//! Minimise the empirical CVaR over a covering knapsack and compare with the
//! expected-cost solution.

use wdro::experiments::{generate_instance, sample_costs};
use wdro::risk::{cvar_discrete, mean_heuristic, solve_cvar};

fn main() -> wdro::Result<()> {
    let inst = generate_instance(25, 1)?;
    let set = inst.knapsack()?.encode()?;
    let dist = sample_costs(&inst, 20, 2)?;
    let alpha = 0.1;

    let rep = solve_cvar(&set, &dist, alpha, 0.0)?;
    println!(
        "CVaR_{alpha} optimum {:.4} with {} items ({} nodes, {:?})",
        rep.objective,
        rep.x.cardinality(),
        rep.nodes,
        rep.elapsed
    );

    let (xm, gamma) = mean_heuristic(&set, &dist, alpha, 0.0)?;
    let v = cvar_discrete(&dist, &xm, alpha)?;
    println!(
        "mean-cost solution has CVaR {v:.4}, ratio {:.3} (guaranteed <= {gamma})",
        v / rep.objective
    );
    Ok(())
}
