//! Row generation for the worst-case CVaR over bounded supports.
//!
//! The master problem is `min { z : zeta · x <= z for zeta in U', x in X }`
//! over a growing cut set `U'`; the adversary of [`crate::worst_case`] prices
//! the master solution and returns the next cut.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::milp::{self, Relation, Row, Status};
use crate::model::{AmbiguitySpec, EmpiricalDistribution, FeasibleSet, RiskSpec, Selection, SolutionReport, SupportSet};
use crate::risk::descending_order;
use crate::worst_case::{worst_distribution, WorstCaseCertificate};

/// Cuts closer than this in the max-norm count as repeats.
pub const CUT_DEDUP_TOL: f64 = 1e-9;
/// Consecutive repeated cuts before the loop gives up.
pub const MAX_STALLS: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct Cut {
    pub zeta: Vec<f64>,
    /// Iteration that produced the cut; 0 for the initial cut.
    pub iteration: usize,
    /// Master solution that was priced; `None` for the initial cut.
    pub generator: Option<Selection>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CutSet {
    pub cuts: Vec<Cut>,
}

impl CutSet {
    fn contains_near(&self, zeta: &[f64]) -> bool {
        self.cuts.iter().any(|c| {
            c.zeta
                .iter()
                .zip(zeta)
                .all(|(a, b)| (a - b).abs() <= CUT_DEDUP_TOL)
        })
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Termination {
    GapClosed,
    MaxIterations,
    Stalled,
}

#[derive(Clone, Debug, Serialize)]
pub struct RowGenIteration {
    pub iteration: usize,
    pub z_lb: f64,
    pub z_ub: f64,
    /// Master solution priced in this iteration.
    pub candidate: Selection,
    /// Best solution found so far.
    pub incumbent: Selection,
    pub adversary_value: f64,
    pub cut_added: bool,
    pub adversary_ms: f64,
}

impl RowGenIteration {
    pub fn gap(&self) -> f64 {
        relative_gap(self.z_lb, self.z_ub)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RowGenTrace {
    pub iterations: Vec<RowGenIteration>,
    pub termination: Termination,
    pub cuts: CutSet,
}

impl RowGenTrace {
    /// `iteration,z_lb,z_ub,gap,adversary_ms`; timings are left empty unless requested.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::from("iteration,z_lb,z_ub,gap,adversary_ms\n");
        for it in &self.iterations {
            let ms = if timing { format!("{:.3}", it.adversary_ms) } else { String::new() };
            let _ = writeln!(out, "{},{},{},{},{}", it.iteration, it.z_lb, it.z_ub, it.gap(), ms);
        }
        out
    }
}

/// `(ub - lb) / lb`, or `ub - lb` when `lb <= 0`.
fn relative_gap(lb: f64, ub: f64) -> f64 {
    if lb > 0.0 {
        (ub - lb) / lb
    } else {
        ub - lb
    }
}

/// Average of the `l` costliest realizations of the certificate under `x`.
pub fn generate_cut(certificate: &WorstCaseCertificate, x: &Selection, l: usize) -> Result<Vec<f64>> {
    let dist = &certificate.distribution;
    if l == 0 || l > dist.len() {
        return Err(Error::invalid(format!("l = {l} must lie in 1..={}", dist.len())));
    }
    let order = descending_order(&dist.costs(x)?);
    Ok(average(order[..l].iter().map(|&i| dist.realization(i)), dist.dim()))
}

fn average<'a>(rows: impl ExactSizeIterator<Item = &'a [f64]>, dim: usize) -> Vec<f64> {
    let count = rows.len() as f64;
    let mut sum = vec![0.0; dim];
    for row in rows {
        for (s, v) in sum.iter_mut().zip(row) {
            *s += v;
        }
    }
    sum.into_iter().map(|s| s / count).collect()
}

fn cut_row(zeta: &[f64], n: usize) -> Row {
    let mut coef = zeta.to_vec();
    coef.push(-1.0);
    debug_assert_eq!(coef.len(), n + 1);
    Row::new(coef, Relation::Le, 0.0)
}

/// Minimise the worst-case CVaR by alternating master solves and adversary calls.
pub fn solve_distr_rowgen(
    set: &FeasibleSet,
    dist: &EmpiricalDistribution,
    support: &SupportSet,
    spec: &AmbiguitySpec,
    risk: &RiskSpec,
    rel_gap: f64,
    max_iter: usize,
) -> Result<(SolutionReport, RowGenTrace)> {
    let n = set.n();
    check_dim(n, dist.dim())?;
    check_dim(dist.len(), risk.n_samples)?;
    risk.require_exact()?;
    if !support.is_bounded() {
        return Err(Error::invalid("row generation needs a bounded support"));
    }
    if !(rel_gap > 0.0) {
        return Err(Error::invalid("rel_gap must be positive"));
    }
    let start = Instant::now();
    let l = risk.l;

    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let master = set.embed(1, objective)?;

    let zeta0 = average(dist.realizations()[..l].iter().map(Vec::as_slice), n);
    let mut cuts = CutSet {
        cuts: vec![Cut {
            zeta: zeta0,
            iteration: 0,
            generator: None,
        }],
    };

    let mut z_lb = f64::NEG_INFINITY;
    let mut z_ub = f64::INFINITY;
    let mut incumbent: Option<Selection> = None;
    let mut hint: Option<Vec<bool>> = None;
    let mut iterations = Vec::new();
    let mut stalls = 0;
    let mut nodes = 0;
    let mut termination = Termination::MaxIterations;

    for iteration in 1..=max_iter.max(1) {
        let rows: Vec<Row> = cuts.cuts.iter().map(|c| cut_row(&c.zeta, n)).collect();
        let report = milp::resolve_with_added_rows(&master, rows, 0.0, hint.take())?.into_solution()?;
        nodes += report.nodes;
        z_lb = z_lb.max(report.best_bound.min(report.objective));
        let candidate = Selection::from_values(&report.values[..n]);

        let timer = Instant::now();
        let cert = worst_distribution(&candidate, dist, support, spec, risk)?;
        let adversary_ms = timer.elapsed().as_secs_f64() * 1e3;
        if cert.value < z_ub {
            z_ub = cert.value;
            incumbent = Some(candidate.clone());
        }
        // the master optimum never exceeds the true optimum, so clamp numerical overshoot
        z_lb = z_lb.min(z_ub);

        let closed = relative_gap(z_lb, z_ub) <= rel_gap;
        let mut cut_added = false;
        if !closed {
            let zeta = generate_cut(&cert, &candidate, l)?;
            if cuts.contains_near(&zeta) {
                stalls += 1;
            } else {
                stalls = 0;
                cut_added = true;
                cuts.cuts.push(Cut {
                    zeta,
                    iteration,
                    generator: Some(candidate.clone()),
                });
            }
        }
        iterations.push(RowGenIteration {
            iteration,
            z_lb,
            z_ub,
            candidate: candidate.clone(),
            incumbent: incumbent.clone().expect("set in the first iteration"),
            adversary_value: cert.value,
            cut_added,
            adversary_ms,
        });
        if closed {
            termination = Termination::GapClosed;
            break;
        }
        if stalls >= MAX_STALLS {
            termination = Termination::Stalled;
            break;
        }
        hint = Some(candidate.bits().to_vec());
    }

    let report = SolutionReport {
        x: incumbent.expect("at least one iteration ran"),
        objective: z_ub,
        status: if termination == Termination::GapClosed {
            Status::Optimal
        } else {
            Status::GapReached
        },
        best_bound: z_lb,
        nodes,
        cuts: cuts.len(),
        iterations: iterations.len(),
        elapsed: start.elapsed(),
    };
    Ok((
        report,
        RowGenTrace {
            iterations,
            termination,
            cuts,
        },
    ))
}
