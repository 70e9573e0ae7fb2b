use std::time::Instant;

use super::{LinearProgram, Relation, SolveReport, Status, FEASIBILITY_TOL};
use crate::error::{Error, Result};

const OPTIMALITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const TIE_TOL: f64 = 1e-12;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_SWITCH: usize = 50;

/// How a structural variable maps onto nonnegative tableau columns.
#[derive(Clone, Copy, Debug)]
enum ColumnMap {
    /// x = lower + col
    Shift { col: usize, lower: f64 },
    /// x = upper - col
    Mirror { col: usize, upper: f64 },
    /// x = pos - neg
    Split { pos: usize, neg: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Unbounded,
}

/// Dense bounded-variable tableau. Every column lives in `[0, upper[j]]`.
struct Tableau {
    m: usize,
    ncols: usize,
    tab: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    at_upper: Vec<bool>,
    upper: Vec<f64>,
    blocked: Vec<bool>,
    beta: Vec<f64>,
    d: Vec<f64>,
    pivots: usize,
    pivot_limit: usize,
    bland: bool,
    degenerate_run: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.tab[i * self.ncols + j]
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        if self.at_upper[j] {
            self.upper[j]
        } else {
            0.0
        }
    }

    fn column_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.ncols).map(|j| self.nonbasic_value(j)).collect();
        for (i, &b) in self.basis.iter().enumerate() {
            v[b] = self.beta[i];
        }
        v
    }

    fn price(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.tab[i * self.ncols..(i + 1) * self.ncols];
                for (dj, a) in self.d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    fn choose_entering(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.ncols {
            if self.is_basic[j] || self.blocked[j] || self.upper[j] <= 0.0 {
                continue;
            }
            let dj = self.d[j];
            let improving = if self.at_upper[j] {
                dj > OPTIMALITY_TOL
            } else {
                dj < -OPTIMALITY_TOL
            };
            if !improving {
                continue;
            }
            if self.bland {
                return Some(j);
            }
            match best {
                Some((_, score)) if dj.abs() <= score => {}
                _ => best = Some((j, dj.abs())),
            }
        }
        best.map(|(j, _)| j)
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.ncols;
        let inv = 1.0 / self.tab[r * nc + j];
        for v in &mut self.tab[r * nc..(r + 1) * nc] {
            *v *= inv;
        }
        self.tab[r * nc + j] = 1.0;
        let nz: Vec<(usize, f64)> = self.tab[r * nc..(r + 1) * nc]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(k, v)| (k, *v))
            .collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tab[i * nc + j];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tab[i * nc..(i + 1) * nc];
            for &(k, v) in &nz {
                row[k] -= f * v;
            }
            row[j] = 0.0;
        }
        let f = self.d[j];
        if f != 0.0 {
            for &(k, v) in &nz {
                self.d[k] -= f * v;
            }
            self.d[j] = 0.0;
        }
        self.is_basic[self.basis[r]] = false;
        self.basis[r] = j;
        self.is_basic[j] = true;
        self.pivots += 1;
    }

    /// Primal simplex iterations on the current reduced costs.
    fn iterate(&mut self) -> Result<Outcome> {
        loop {
            if self.pivots > self.pivot_limit {
                return Err(Error::Solver("simplex iteration limit reached".into()));
            }
            let Some(j) = self.choose_entering() else {
                return Ok(Outcome::Optimal);
            };
            let dir = if self.at_upper[j] { -1.0 } else { 1.0 };

            // Ratio test. `leave = None` with finite theta means a bound flip.
            let mut theta = self.upper[j];
            let mut leave: Option<(usize, bool, f64)> = None;
            for i in 0..self.m {
                let a = dir * self.at(i, j);
                let b = self.basis[i];
                let (limit, to_upper) = if a > PIVOT_TOL {
                    (self.beta[i].max(0.0) / a, false)
                } else if a < -PIVOT_TOL && self.upper[b].is_finite() {
                    ((self.upper[b] - self.beta[i]).max(0.0) / -a, true)
                } else {
                    continue;
                };
                let better = if limit < theta - TIE_TOL {
                    true
                } else if limit <= theta + TIE_TOL {
                    match leave {
                        None => false,
                        Some((r, _, ar)) => {
                            if self.bland {
                                b < self.basis[r]
                            } else {
                                a.abs() > ar.abs()
                            }
                        }
                    }
                } else {
                    false
                };
                if better {
                    theta = limit;
                    leave = Some((i, to_upper, a));
                }
            }
            if theta.is_infinite() {
                return Ok(Outcome::Unbounded);
            }

            if theta <= TIE_TOL {
                self.degenerate_run += 1;
                if self.degenerate_run >= DEGENERATE_SWITCH {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }

            for i in 0..self.m {
                let a = self.at(i, j);
                if a != 0.0 {
                    self.beta[i] -= dir * theta * a;
                }
            }
            match leave {
                None => {
                    self.at_upper[j] = !self.at_upper[j];
                    self.pivots += 1;
                }
                Some((r, to_upper, _)) => {
                    let entering_value = self.nonbasic_value(j) + dir * theta;
                    let leaving = self.basis[r];
                    self.at_upper[leaving] = to_upper && self.upper[leaving] > 0.0;
                    self.pivot(r, j);
                    self.at_upper[j] = false;
                    self.beta[r] = entering_value;
                }
            }
        }
    }
}

/// Solve `lp` with the two-phase bounded-variable simplex.
///
/// Dantzig pricing is used until a run of degenerate pivots is seen, after
/// which the solve switches to Bland's rule for the remainder.
pub fn solve_lp(lp: &LinearProgram) -> Result<SolveReport> {
    lp.validate()?;
    let start = Instant::now();
    let n = lp.num_vars();

    // Map structural variables onto nonnegative columns.
    let mut maps = Vec::with_capacity(n);
    let mut col_upper: Vec<f64> = Vec::new();
    for j in 0..n {
        let (lo, up) = (lp.lower[j], lp.upper[j]);
        if up < lo - FEASIBILITY_TOL * (1.0 + lo.abs()) {
            let mut report = SolveReport::empty(Status::Infeasible);
            report.elapsed = start.elapsed();
            return Ok(report);
        }
        if lo.is_finite() {
            maps.push(ColumnMap::Shift {
                col: col_upper.len(),
                lower: lo,
            });
            col_upper.push((up - lo).max(0.0));
        } else if up.is_finite() {
            maps.push(ColumnMap::Mirror {
                col: col_upper.len(),
                upper: up,
            });
            col_upper.push(f64::INFINITY);
        } else {
            maps.push(ColumnMap::Split {
                pos: col_upper.len(),
                neg: col_upper.len() + 1,
            });
            col_upper.push(f64::INFINITY);
            col_upper.push(f64::INFINITY);
        }
    }
    let n_struct = col_upper.len();

    let mut struct_cost = vec![0.0; n_struct];
    for (j, map) in maps.iter().enumerate() {
        let c = lp.objective[j];
        match *map {
            ColumnMap::Shift { col, .. } => struct_cost[col] = c,
            ColumnMap::Mirror { col, .. } => struct_cost[col] = -c,
            ColumnMap::Split { pos, neg } => {
                struct_cost[pos] = c;
                struct_cost[neg] = -c;
            }
        }
    }

    // Rows in column space, normalised to a nonnegative right-hand side.
    let m = lp.rows.len();
    let mut rows: Vec<(Vec<f64>, Relation, f64, f64)> = Vec::with_capacity(m);
    for row in &lp.rows {
        let mut coef = vec![0.0; n_struct];
        let mut rhs = row.rhs;
        for (j, map) in maps.iter().enumerate() {
            let a = row.coefficients[j];
            if a == 0.0 {
                continue;
            }
            match *map {
                ColumnMap::Shift { col, lower } => {
                    coef[col] = a;
                    rhs -= a * lower;
                }
                ColumnMap::Mirror { col, upper } => {
                    coef[col] = -a;
                    rhs -= a * upper;
                }
                ColumnMap::Split { pos, neg } => {
                    coef[pos] = a;
                    coef[neg] = -a;
                }
            }
        }
        let mut relation = row.relation;
        let mut sign = 1.0;
        if rhs < 0.0 {
            sign = -1.0;
            rhs = -rhs;
            coef.iter_mut().for_each(|a| *a = -*a);
            relation = match relation {
                Relation::Ge => Relation::Le,
                Relation::Le => Relation::Ge,
                Relation::Eq => Relation::Eq,
            };
        }
        rows.push((coef, relation, rhs, sign));
    }

    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let ncols = n_struct + n_slack + n_art;
    let first_art = n_struct + n_slack;

    let mut t = Tableau {
        m,
        ncols,
        tab: vec![0.0; m * ncols],
        basis: vec![0; m],
        is_basic: vec![false; ncols],
        at_upper: vec![false; ncols],
        upper: col_upper,
        blocked: vec![false; ncols],
        beta: vec![0.0; m],
        d: vec![0.0; ncols],
        pivots: 0,
        pivot_limit: 50 * (m + ncols) + 10_000,
        bland: false,
        degenerate_run: 0,
    };
    t.upper.resize(ncols, f64::INFINITY);

    // Identity column of each row, used to read off the duals at the end.
    let mut identity_col = vec![0; m];
    let (mut next_slack, mut next_art) = (n_struct, first_art);
    for (i, (coef, relation, rhs, _)) in rows.iter().enumerate() {
        t.tab[i * ncols..i * ncols + n_struct].copy_from_slice(coef);
        t.beta[i] = *rhs;
        match relation {
            Relation::Le => {
                t.tab[i * ncols + next_slack] = 1.0;
                identity_col[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                t.tab[i * ncols + next_slack] = -1.0;
                next_slack += 1;
                t.tab[i * ncols + next_art] = 1.0;
                identity_col[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                t.tab[i * ncols + next_art] = 1.0;
                identity_col[i] = next_art;
                next_art += 1;
            }
        }
        t.basis[i] = identity_col[i];
        t.is_basic[identity_col[i]] = true;
    }

    let rhs_scale = 1.0 + rows.iter().map(|r| r.2).fold(0.0, f64::max);

    if n_art > 0 {
        let mut phase1 = vec![0.0; ncols];
        phase1[first_art..].iter_mut().for_each(|c| *c = 1.0);
        t.price(&phase1);
        t.iterate()?;
        let infeasibility: f64 = t
            .basis
            .iter()
            .zip(&t.beta)
            .filter(|(b, _)| **b >= first_art)
            .map(|(_, v)| v.max(0.0))
            .sum();
        if infeasibility > FEASIBILITY_TOL * rhs_scale {
            let mut report = SolveReport::empty(Status::Infeasible);
            report.pivots = t.pivots;
            report.elapsed = start.elapsed();
            return Ok(report);
        }
        // Drive remaining artificials out of the basis where possible.
        for r in 0..m {
            if t.basis[r] < first_art {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..first_art {
                if t.is_basic[j] {
                    continue;
                }
                let a = t.at(r, j).abs();
                if a > PIVOT_TOL && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((j, _)) = best {
                let value = t.nonbasic_value(j);
                let leaving = t.basis[r];
                t.at_upper[leaving] = false;
                t.pivot(r, j);
                t.at_upper[j] = false;
                t.beta[r] = value;
            }
        }
        for j in first_art..ncols {
            t.upper[j] = 0.0;
            t.blocked[j] = true;
            if !t.is_basic[j] {
                t.at_upper[j] = false;
            }
        }
        t.bland = false;
        t.degenerate_run = 0;
    }

    let mut cost = struct_cost.clone();
    cost.resize(ncols, 0.0);
    t.price(&cost);
    let outcome = t.iterate()?;
    if outcome == Outcome::Unbounded {
        let mut report = SolveReport::empty(Status::Unbounded);
        report.objective = f64::NEG_INFINITY;
        report.pivots = t.pivots;
        report.elapsed = start.elapsed();
        return Ok(report);
    }

    let cols = t.column_values();
    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            ColumnMap::Shift { col, lower } => lower + cols[col],
            ColumnMap::Mirror { col, upper } => upper - cols[col],
            ColumnMap::Split { pos, neg } => cols[pos] - cols[neg],
        })
        .collect();

    let duals: Vec<f64> = (0..m).map(|i| -t.d[identity_col[i]] * rows[i].3).collect();
    let reduced_costs: Vec<f64> = (0..n)
        .map(|j| {
            lp.objective[j]
                - lp.rows
                    .iter()
                    .zip(&duals)
                    .map(|(row, y)| row.coefficients[j] * y)
                    .sum::<f64>()
        })
        .collect();

    let objective = lp.objective_value(&x);
    Ok(SolveReport {
        status: Status::Optimal,
        objective,
        values: x,
        best_bound: objective,
        gap_abs: 0.0,
        gap_rel: 0.0,
        nodes: 1,
        cuts: 0,
        pivots: t.pivots,
        elapsed: start.elapsed(),
        duals,
        reduced_costs,
    })
}
