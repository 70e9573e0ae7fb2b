//! Worst-case CVaR over a Wasserstein ball with support `R^n_+`: the penalty
//! `gamma eps ||x||_{q'}` for the three ground norms, plus a worst distribution.

use wdro::model::{AmbiguitySpec, EmpiricalDistribution, Norm};
use wdro::problems::RepSelectionInstance;
use wdro::unrestricted::solve_distr_unrestricted;
use wdro::worst_case::worst_distribution_unrestricted;

fn main() -> wdro::Result<()> {
    // pick one tool from each of three groups
    let rs = RepSelectionInstance::from_sizes(&[3, 2, 3])?;
    let set = rs.encode()?;
    let dist = EmpiricalDistribution::new(vec![
        vec![1.0, 2.0, 0.5, 3.0, 1.0, 2.0, 0.2, 1.5],
        vec![2.0, 0.5, 1.5, 1.0, 2.5, 0.5, 2.5, 1.0],
        vec![0.5, 1.5, 3.0, 2.0, 0.5, 1.0, 1.0, 0.5],
        vec![1.5, 1.0, 1.0, 0.5, 1.5, 2.5, 0.5, 2.0],
    ])?;
    let alpha = 0.5;
    for norm in [Norm::L1, Norm::L2, Norm::LInf] {
        for eps in [0.0, 0.1, 0.5] {
            let spec = AmbiguitySpec::new(eps, norm)?;
            let rep = solve_distr_unrestricted(&set, &dist, &spec, alpha, 0.0)?;
            println!(
                "q = {:<3} eps = {eps:<3}  worst-case CVaR {:.4}  x = {:?}",
                norm.label(),
                rep.objective,
                rep.x.indices().collect::<Vec<_>>()
            );
        }
    }
    let spec = AmbiguitySpec::new(0.1, Norm::L2)?;
    let x = solve_distr_unrestricted(&set, &dist, &spec, alpha, 0.0)?.x;
    let cert = worst_distribution_unrestricted(&x, &dist, &spec, alpha)?;
    println!("worst distribution (q = 2, eps = 0.1), CVaR {:.4}:", cert.value);
    for row in cert.distribution.realizations() {
        println!("  {:?}", row.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>());
    }
    Ok(())
}
