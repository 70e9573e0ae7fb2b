use std::fmt::Write;

use super::MixedModel;

fn term(out: &mut String, coef: f64, var: usize, first: bool) {
    let sign = if coef < 0.0 { " -" } else if first { "" } else { " +" };
    let _ = write!(out, "{sign} {} x{var}", coef.abs());
}

/// Render a model in LP text format (objective, rows, bounds, binaries).
pub fn write_lp_text(model: &MixedModel) -> String {
    let lp = &model.lp;
    let mut out = String::from("Minimize\n obj:");
    let mut first = true;
    for (j, &c) in lp.objective.iter().enumerate() {
        if c != 0.0 {
            term(&mut out, c, j, first);
            first = false;
        }
    }
    if first {
        out.push_str(" 0 x0");
    }
    out.push_str("\nSubject To\n");
    for (i, row) in lp.rows.iter().enumerate() {
        let _ = write!(out, " c{i}:");
        let mut first = true;
        for (j, &a) in row.coefficients.iter().enumerate() {
            if a != 0.0 {
                term(&mut out, a, j, first);
                first = false;
            }
        }
        if first {
            out.push_str(" 0 x0");
        }
        let _ = writeln!(out, " {} {}", row.relation.symbol(), row.rhs);
    }
    out.push_str("Bounds\n");
    for j in 0..lp.num_vars() {
        let (lo, up) = (lp.lower[j], lp.upper[j]);
        match (lo.is_finite(), up.is_finite()) {
            (true, true) => writeln!(out, " {lo} <= x{j} <= {up}"),
            (true, false) => writeln!(out, " x{j} >= {lo}"),
            (false, true) => writeln!(out, " -inf <= x{j} <= {up}"),
            (false, false) => writeln!(out, " x{j} free"),
        }
        .ok();
    }
    if !model.binaries.is_empty() {
        out.push_str("Binaries\n");
        for &j in &model.binaries {
            let _ = write!(out, " x{j}");
        }
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{LinearProgram, Relation};

    #[test]
    fn renders_sections() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, -2.0];
        lp.add_row(vec![1.0, 1.0], Relation::Ge, 1.0);
        lp.set_bounds(1, f64::NEG_INFINITY, f64::INFINITY);
        let m = MixedModel::new(lp, vec![0]).unwrap();
        let text = write_lp_text(&m);
        assert!(text.contains("obj: 1 x0 - 2 x1"));
        assert!(text.contains("c0: 1 x0 + 1 x1 >= 1"));
        assert!(text.contains("x1 free"));
        assert!(text.contains("Binaries\n x0\n"));
    }
}
