use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{solve_lp, LinearProgram, MixedModel, Row, SolveReport, Status, INTEGRALITY_TOL};
use crate::error::Result;

/// Default cap on explored nodes.
pub const DEFAULT_MAX_NODES: usize = 2_000_000;
/// Run the rounding heuristic every this many nodes.
const HEURISTIC_PERIOD: usize = 64;

/// Open node keyed by its parent's LP bound.
#[derive(Debug)]
struct OpenNode {
    bound: f64,
    depth: usize,
    id: usize,
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for OpenNode {}
impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenNode {
    // BinaryHeap is a max-heap: smallest bound first, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

/// Node arena entry: the branching decision that created the node.
#[derive(Clone, Copy, Debug)]
struct Decision {
    parent: Option<usize>,
    var: usize,
    value: bool,
}

/// Best-first branch and bound over the binary variables of a [`MixedModel`].
#[derive(Clone, Debug)]
pub struct BranchAndBound {
    gap_tol: f64,
    max_nodes: usize,
    hint: Option<Vec<bool>>,
}

impl BranchAndBound {
    pub fn new(gap_tol: f64) -> Self {
        BranchAndBound {
            gap_tol: gap_tol.max(0.0),
            max_nodes: DEFAULT_MAX_NODES,
            hint: None,
        }
    }

    pub fn max_nodes(mut self, max_nodes: usize) -> Self {
        self.max_nodes = max_nodes.max(1);
        self
    }

    /// Binary values (one per entry of `model.binaries`) tried as a starting incumbent.
    pub fn hint(mut self, hint: Option<Vec<bool>>) -> Self {
        self.hint = hint;
        self
    }

    pub fn solve(&self, model: &MixedModel) -> Result<SolveReport> {
        let start = Instant::now();
        let mut search = Search {
            model,
            incumbent: None,
            arena: Vec::new(),
            pivots: 0,
        };

        if let Some(hint) = &self.hint {
            if hint.len() == model.binaries.len() {
                let fixes: Vec<(usize, bool)> =
                    model.binaries.iter().copied().zip(hint.iter().copied()).collect();
                search.try_completion(&fixes)?;
            }
        }

        let root = search.solve_node(None)?;
        let mut report = match root.status {
            Status::Infeasible | Status::Unbounded if search.incumbent.is_none() => {
                let mut r = SolveReport::empty(root.status);
                r.nodes = 1;
                r.pivots = search.pivots;
                r.elapsed = start.elapsed();
                return Ok(r);
            }
            _ => SolveReport::empty(Status::Optimal),
        };

        let mut heap: BinaryHeap<OpenNode> = BinaryHeap::new();
        let mut nodes = 0usize;
        let mut budget_hit = false;
        let mut pending = Some((None, root));

        loop {
            let (node_id, lp) = match pending.take() {
                Some(p) => p,
                None => {
                    let Some(open) = heap.pop() else { break };
                    if search.prunes(open.bound, self.gap_tol) {
                        continue;
                    }
                    if nodes >= self.max_nodes {
                        heap.push(open);
                        budget_hit = true;
                        break;
                    }
                    let lp = search.solve_node(Some(open.id))?;
                    (Some(open.id), lp)
                }
            };
            nodes += 1;
            if lp.status != Status::Optimal || search.prunes(lp.objective, self.gap_tol) {
                continue;
            }
            if model.is_integral(&lp.values) {
                let mut values = lp.values;
                for &j in &model.binaries {
                    values[j] = values[j].round();
                }
                search.offer(values);
                continue;
            }
            if node_id.is_none() || nodes % HEURISTIC_PERIOD == 0 {
                search.round_and_complete(node_id, &lp.values)?;
                if search.prunes(lp.objective, self.gap_tol) {
                    continue;
                }
            }

            let branch_var = model
                .binaries
                .iter()
                .copied()
                .map(|j| (j, lp.values[j].min(1.0 - lp.values[j])))
                .filter(|(_, f)| *f > INTEGRALITY_TOL)
                .fold(None::<(usize, f64)>, |best, (j, f)| match best {
                    Some((_, bf)) if f <= bf => best,
                    _ => Some((j, f)),
                })
                .map(|(j, _)| j)
                .expect("non-integral relaxation has a fractional binary");

            let depth = search.depth(node_id) + 1;
            let nearest = lp.values[branch_var] >= 0.5;
            for value in [nearest, !nearest] {
                let id = search.arena.len();
                search.arena.push(Decision {
                    parent: node_id,
                    var: branch_var,
                    value,
                });
                heap.push(OpenNode {
                    bound: lp.objective,
                    depth,
                    id,
                });
            }
        }

        let open_bound = heap
            .iter()
            .map(|n| n.bound)
            .fold(f64::INFINITY, f64::min);
        report.nodes = nodes;
        report.pivots = search.pivots;
        match search.incumbent.take() {
            Some((objective, values)) => {
                let bound = open_bound.min(objective);
                report.objective = objective;
                report.values = values;
                report.best_bound = bound;
                report.gap_abs = (objective - bound).max(0.0);
                report.gap_rel = report.gap_abs / objective.abs().max(1e-10);
                report.status = if budget_hit && report.gap_abs > self.gap_tol {
                    Status::GapReached
                } else {
                    Status::Optimal
                };
            }
            None => {
                report.status = if budget_hit {
                    Status::GapReached
                } else {
                    Status::Infeasible
                };
                report.best_bound = open_bound;
            }
        }
        report.elapsed = start.elapsed();
        Ok(report)
    }
}

struct Search<'a> {
    model: &'a MixedModel,
    incumbent: Option<(f64, Vec<f64>)>,
    arena: Vec<Decision>,
    pivots: usize,
}

impl Search<'_> {
    fn prunes(&self, bound: f64, gap_tol: f64) -> bool {
        match &self.incumbent {
            Some((inc, _)) => bound >= inc - gap_tol.max(1e-9 * (1.0 + inc.abs())),
            None => false,
        }
    }

    fn depth(&self, node: Option<usize>) -> usize {
        let mut depth = 0;
        let mut cur = node;
        while let Some(id) = cur {
            depth += 1;
            cur = self.arena[id].parent;
        }
        depth
    }

    fn fixes(&self, node: Option<usize>) -> Vec<(usize, bool)> {
        let mut out = Vec::new();
        let mut cur = node;
        while let Some(id) = cur {
            let d = self.arena[id];
            out.push((d.var, d.value));
            cur = d.parent;
        }
        out
    }

    fn solve_fixed(&mut self, fixes: &[(usize, bool)]) -> Result<SolveReport> {
        let mut lp: LinearProgram = self.model.lp.clone();
        for &(j, v) in fixes {
            let v = if v { 1.0 } else { 0.0 };
            lp.lower[j] = v;
            lp.upper[j] = v;
        }
        let report = solve_lp(&lp)?;
        self.pivots += report.pivots;
        Ok(report)
    }

    fn solve_node(&mut self, node: Option<usize>) -> Result<SolveReport> {
        let fixes = self.fixes(node);
        self.solve_fixed(&fixes)
    }

    fn offer(&mut self, values: Vec<f64>) {
        let objective = self.model.lp.objective_value(&values);
        let better = match &self.incumbent {
            Some((inc, _)) => objective < *inc - 1e-12,
            None => true,
        };
        if better {
            self.incumbent = Some((objective, values));
        }
    }

    /// Fix every binary and solve for the continuous part.
    fn try_completion(&mut self, fixes: &[(usize, bool)]) -> Result<()> {
        let report = self.solve_fixed(fixes)?;
        if report.status == Status::Optimal {
            let mut values = report.values;
            for &(j, v) in fixes {
                values[j] = if v { 1.0 } else { 0.0 };
            }
            self.offer(values);
        }
        Ok(())
    }

    fn round_and_complete(&mut self, node: Option<usize>, relaxed: &[f64]) -> Result<()> {
        let nearest: Vec<(usize, bool)> = self
            .model
            .binaries
            .iter()
            .map(|&j| (j, relaxed[j] >= 0.5))
            .collect();
        self.try_completion(&nearest)?;
        if node.is_none() {
            let up: Vec<(usize, bool)> = self
                .model
                .binaries
                .iter()
                .map(|&j| (j, relaxed[j] > INTEGRALITY_TOL))
                .collect();
            self.try_completion(&up)?;
        }
        Ok(())
    }
}

/// Solve `model` to a proven absolute gap of `gap_tol`.
pub fn solve_mixed(model: &MixedModel, gap_tol: f64) -> Result<SolveReport> {
    BranchAndBound::new(gap_tol).solve(model)
}

/// Solve `model` augmented with `rows`.
///
/// `hint` (binary values in `model.binaries` order, usually the previous
/// incumbent) is tried as a warm start; it only affects speed.
pub fn resolve_with_added_rows(
    model: &MixedModel,
    rows: Vec<Row>,
    gap_tol: f64,
    hint: Option<Vec<bool>>,
) -> Result<SolveReport> {
    let added = rows.len();
    let augmented = model.with_rows(rows);
    let mut report = BranchAndBound::new(gap_tol).hint(hint).solve(&augmented)?;
    report.cuts = added;
    Ok(report)
}
