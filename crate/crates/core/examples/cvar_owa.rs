//! CVaR of a fixed solution as an ordered weighted average, checked against
//! the linear programming form.

use wdro::model::{EmpiricalDistribution, Selection};
use wdro::risk::{cvar_discrete, cvar_lp, owa_weights};

fn main() -> wdro::Result<()> {
    let dist = EmpiricalDistribution::new(vec![
        vec![1.0, 4.0, 2.0],
        vec![3.0, 1.0, 1.0],
        vec![2.0, 2.0, 5.0],
        vec![0.5, 1.5, 1.0],
        vec![4.0, 0.0, 2.0],
    ])?;
    let x = Selection::from_indices(3, &[0, 2]);
    println!("costs of x: {:?}", dist.costs(&x)?);
    for alpha in [1.0, 0.6, 0.5, 0.3, 0.2, 0.1] {
        let w = owa_weights(alpha, dist.len())?;
        println!(
            "alpha = {alpha:<4} weights = {:?}  CVaR = {:.4}  (LP {:.4})",
            w.as_slice().iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
            cvar_discrete(&dist, &x, alpha)?,
            cvar_lp(&dist, &x, alpha)?
        );
    }
    Ok(())
}
