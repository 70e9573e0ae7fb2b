//! Row generation on a random knapsack with a box support, printing the
//! bound trace as CSV.

use wdro::experiments::{generate_instance, sample_costs};
use wdro::model::{AmbiguitySpec, Norm, RiskSpec};
use wdro::risk::solve_cvar;
use wdro::rowgen::solve_distr_rowgen;

fn main() -> wdro::Result<()> {
    let inst = generate_instance(30, 9)?;
    let set = inst.knapsack()?.encode()?;
    let dist = sample_costs(&inst, 10, 10)?;
    let support = inst.support()?;
    let risk = RiskSpec::new(0.2, 10)?;
    let spec = AmbiguitySpec::new(0.05, Norm::LInf)?;

    let saa = solve_cvar(&set, &dist, risk.alpha, 0.0)?;
    let (rep, trace) = solve_distr_rowgen(&set, &dist, &support, &spec, &risk, 1e-4, 200)?;
    print!("{}", trace.to_csv(true));
    println!(
        "{:?} after {} iterations with {} cuts: worst-case CVaR {:.4} (SAA empirical CVaR {:.4})",
        trace.termination,
        trace.iterations.len(),
        trace.cuts.len(),
        rep.objective,
        saa.objective
    );
    Ok(())
}
