//! Dense simplex and best-first branch and bound for small mixed 0-1 models.
//!
//! Everything here is sized for desk-scale instances (a few hundred variables
//! and a few dozen rows). The LP solver is a bounded-variable dense tableau
//! simplex with a two-phase start; branch and bound re-solves each node from
//! scratch, which keeps pivot and branch sequences fully deterministic.

mod branch;
mod format;
mod simplex;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use branch::{resolve_with_added_rows, solve_mixed, BranchAndBound};
pub use format::write_lp_text;
pub use simplex::solve_lp;

/// Primal feasibility tolerance used by the simplex and the feasibility checks.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// A binary variable within this distance of 0 or 1 counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Ge => lhs >= rhs - tol,
            Relation::Le => lhs <= rhs + tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Ge => ">=",
            Relation::Le => "<=",
            Relation::Eq => "=",
        }
    }
}

/// A dense linear row `coefficients · x  (relation)  rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn new(coefficients: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Row {
            coefficients,
            relation,
            rhs,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coefficients.iter().zip(x).map(|(a, v)| a * v).sum()
    }

    pub fn is_satisfied(&self, x: &[f64], tol: f64) -> bool {
        let scale = 1.0 + self.rhs.abs();
        self.relation.holds(self.activity(x), self.rhs, tol * scale)
    }
}

/// `min objective · x` subject to rows and `lower <= x <= upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// `n` variables with zero cost and bounds `[0, +inf)`.
    pub fn new(n: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; n],
            rows: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.rows.push(Row::new(coefficients, relation, rhs));
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.lower.len().min(self.upper.len()),
            });
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("objective coefficients must be finite"));
        }
        for row in &self.rows {
            crate::error::check_dim(n, row.coefficients.len())?;
            if !row.rhs.is_finite() || row.coefficients.iter().any(|a| !a.is_finite()) {
                return Err(Error::invalid("row coefficients must be finite"));
            }
        }
        for j in 0..n {
            if self.lower[j].is_nan() || self.upper[j].is_nan() || self.lower[j] == f64::INFINITY {
                return Err(Error::invalid(format!("bad bounds on variable {j}")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// True when `x` satisfies every row and bound within `tol` (scaled by rhs).
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.num_vars()
            && x.iter().enumerate().all(|(j, &v)| {
                v >= self.lower[j] - tol * (1.0 + self.lower[j].abs().min(1e12))
                    && v <= self.upper[j] + tol * (1.0 + self.upper[j].abs().min(1e12))
            })
            && self.rows.iter().all(|r| r.is_satisfied(x, tol))
    }
}

/// A linear program plus the set of variables that must be 0 or 1.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedModel {
    pub lp: LinearProgram,
    pub binaries: Vec<usize>,
}

impl MixedModel {
    /// Binary variables get their bounds clipped to `[0, 1]`.
    pub fn new(mut lp: LinearProgram, mut binaries: Vec<usize>) -> Result<Self> {
        binaries.sort_unstable();
        binaries.dedup();
        if let Some(&j) = binaries.iter().find(|&&j| j >= lp.num_vars()) {
            return Err(Error::invalid(format!("binary index {j} out of range")));
        }
        for &j in &binaries {
            lp.lower[j] = lp.lower[j].max(0.0);
            lp.upper[j] = lp.upper[j].min(1.0);
        }
        lp.validate()?;
        Ok(MixedModel { lp, binaries })
    }

    pub fn with_rows(&self, rows: impl IntoIterator<Item = Row>) -> Self {
        let mut model = self.clone();
        model.lp.rows.extend(rows);
        model
    }

    pub fn is_integral(&self, x: &[f64]) -> bool {
        self.binaries
            .iter()
            .all(|&j| x[j].min(1.0 - x[j]).abs() <= INTEGRALITY_TOL)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    GapReached,
}

/// Outcome of an LP or MIP solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: Status,
    /// Objective of `values`; `+inf` when no feasible point is known.
    pub objective: f64,
    /// Variable assignment; empty when no feasible point is known.
    pub values: Vec<f64>,
    /// Proven lower bound on the optimum.
    pub best_bound: f64,
    pub gap_abs: f64,
    pub gap_rel: f64,
    pub nodes: usize,
    pub cuts: usize,
    pub pivots: usize,
    pub elapsed: Duration,
    /// Row duals (LP solves only).
    pub duals: Vec<f64>,
    /// Reduced costs of the structural variables (LP solves only).
    pub reduced_costs: Vec<f64>,
}

impl SolveReport {
    pub(crate) fn empty(status: Status) -> Self {
        SolveReport {
            status,
            objective: f64::INFINITY,
            values: Vec::new(),
            best_bound: f64::NEG_INFINITY,
            gap_abs: f64::INFINITY,
            gap_rel: f64::INFINITY,
            nodes: 0,
            cuts: 0,
            pivots: 0,
            elapsed: Duration::ZERO,
            duals: Vec::new(),
            reduced_costs: Vec::new(),
        }
    }

    pub fn has_solution(&self) -> bool {
        !self.values.is_empty()
    }

    /// Turn non-solutions into errors.
    pub fn into_solution(self) -> Result<Self> {
        match self.status {
            Status::Infeasible => Err(Error::Infeasible),
            Status::Unbounded => Err(Error::Unbounded),
            _ if !self.has_solution() => Err(Error::Solver(
                "node budget exhausted before any feasible point was found".into(),
            )),
            _ => Ok(self),
        }
    }
}
