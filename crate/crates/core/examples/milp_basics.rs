//! Build a small binary program, print it in LP format and solve it with the
//! built-in branch and bound.

use wdro::milp::{solve_lp, solve_mixed, write_lp_text, LinearProgram, MixedModel, Relation};

fn main() -> wdro::Result<()> {
    // min 3a + 2b + 4c  s.t.  a + b + c >= 2,  2a + c <= 2
    let mut lp = LinearProgram::new(3);
    lp.objective = vec![3.0, 2.0, 4.0];
    lp.add_row(vec![1.0, 1.0, 1.0], Relation::Ge, 2.0);
    lp.add_row(vec![2.0, 0.0, 1.0], Relation::Le, 2.0);
    let model = MixedModel::new(lp.clone(), vec![0, 1, 2])?;
    print!("{}", write_lp_text(&model));

    let mut relaxed = lp;
    for j in 0..3 {
        relaxed.set_bounds(j, 0.0, 1.0);
    }
    let r = solve_lp(&relaxed)?;
    println!("LP relaxation: {:.4} at {:?}", r.objective, r.values);

    let m = solve_mixed(&model, 0.0)?.into_solution()?;
    println!(
        "binary optimum: {:.4} at {:?} ({} nodes, {} pivots)",
        m.objective, m.values, m.nodes, m.pivots
    );
    Ok(())
}
