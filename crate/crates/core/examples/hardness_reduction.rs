//! Encode a min-max representatives selection instance as a CVaR instance and
//! recover the min-max optimum from the CVaR optimum.

use wdro::problems::{reduce_minmax_rs_to_cvar_rs, RepSelectionInstance};
use wdro::risk::solve_cvar;

fn main() -> wdro::Result<()> {
    let rs = RepSelectionInstance::from_sizes(&[2, 3, 2])?;
    let scenarios = vec![
        vec![1.0, 3.0, 2.0, 0.5, 1.5, 2.0, 1.0],
        vec![2.0, 1.0, 0.5, 2.5, 1.0, 1.0, 2.0],
        vec![1.5, 2.0, 1.0, 1.0, 2.0, 0.5, 1.5],
    ];
    let (minmax_x, minmax) = rs
        .encode()?
        .enumerate()
        .into_iter()
        .map(|x| {
            let worst = scenarios.iter().map(|s| x.cost(s)).fold(f64::NEG_INFINITY, f64::max);
            (x, worst)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    println!("min-max optimum {minmax:.4} at {:?}", minmax_x.indices().collect::<Vec<_>>());
    for alpha in [0.3, 0.5, 0.7] {
        let red = reduce_minmax_rs_to_cvar_rs(&rs, &scenarios, alpha)?;
        let rep = solve_cvar(&red.instance.encode()?, &red.distribution, red.alpha, 0.0)?;
        println!(
            "alpha = {alpha}: l = {}, N = {}, M = {:.2}; CVaR optimum {:.4}, mapped min-max value {:.4}, projected x {:?}",
            red.l,
            red.n_samples,
            red.big_m,
            rep.objective,
            red.value_map(minmax),
            red.project(&rep.x).indices().collect::<Vec<_>>()
        );
    }
    Ok(())
}
