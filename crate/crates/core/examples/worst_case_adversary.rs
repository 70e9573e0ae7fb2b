//! The adversary for a fixed solution on a box and on a polytope support, for
//! each ground norm.

use wdro::model::{AmbiguitySpec, EmpiricalDistribution, HalfSpace, Norm, RiskSpec, Selection, SupportSet};
use wdro::risk::cvar_discrete;
use wdro::worst_case::worst_distribution;

fn main() -> wdro::Result<()> {
    let dist = EmpiricalDistribution::new(vec![
        vec![1.0, 2.0, 0.5],
        vec![2.0, 1.0, 1.5],
        vec![0.5, 0.5, 2.5],
        vec![1.5, 1.5, 1.0],
    ])?;
    let x = Selection::from_indices(3, &[0, 2]);
    let risk = RiskSpec::new(0.5, 4)?;
    let boxed = SupportSet::boxed(vec![0.0; 3], vec![3.0, 3.0, 3.0])?;
    let budget = SupportSet::polytope(
        3,
        vec![
            HalfSpace { normal: vec![1.0, 1.0, 1.0], offset: 5.0 },
            HalfSpace { normal: vec![1.0, 0.0, 0.0], offset: 2.5 },
        ],
    )?;
    println!("empirical CVaR {:.4}", cvar_discrete(&dist, &x, risk.alpha)?);
    for (name, support) in [("box", &boxed), ("polytope", &budget)] {
        for norm in [Norm::L1, Norm::L2, Norm::LInf] {
            let spec = AmbiguitySpec::new(0.25, norm)?;
            let cert = worst_distribution(&x, &dist, support, &spec, &risk)?;
            println!(
                "{name:<8} q = {:<3} worst CVaR {:.4}, lifted {:?}, budget used {:.4} of {:.4}",
                norm.label(),
                cert.value,
                cert.active_subset,
                cert.budget_used,
                spec.budget(dist.len())
            );
        }
    }
    Ok(())
}
