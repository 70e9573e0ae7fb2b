//! Domain types shared by every solver.
//!
//! All types are immutable after construction. Dimensions are fixed when a
//! value is built and every cross-type operation checks them.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::milp::{self, LinearProgram, MixedModel, Relation, Row, SolveReport, Status, FEASIBILITY_TOL};
use crate::problems::{DagShortestPathInstance, KnapsackInstance, RepSelectionInstance};

/// `|alpha * N - l| <= ALPHA_EXACT_TOL` counts as `alpha = l / N`.
pub const ALPHA_EXACT_TOL: f64 = 1e-9;

/// A 0-1 solution vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Selection(Vec<bool>);

impl Selection {
    pub fn new(bits: Vec<bool>) -> Self {
        Selection(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Selection(vec![false; n])
    }

    /// Round a (near-)binary vector, e.g. the `x` block of a MIP solution.
    pub fn from_values(values: &[f64]) -> Self {
        Selection(values.iter().map(|v| *v > 0.5).collect())
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut bits = vec![false; n];
        for &j in indices {
            bits[j] = true;
        }
        Selection(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        !self.0.iter().any(|b| *b)
    }

    pub fn cardinality(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, j: usize) -> bool {
        self.0[j]
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, b)| **b).map(|(j, _)| j)
    }

    /// `cost · x`
    pub fn cost(&self, cost: &[f64]) -> f64 {
        self.indices().map(|j| cost[j]).sum()
    }

    pub fn to_values(&self) -> Vec<f64> {
        self.0.iter().map(|b| if *b { 1.0 } else { 0.0 }).collect()
    }

    /// All `2^n` binary vectors in lexicographic bit order (test oracles only).
    pub fn enumerate_all(n: usize) -> impl Iterator<Item = Selection> {
        assert!(n < 31, "enumeration is limited to small n");
        (0u32..(1u32 << n)).map(move |mask| Selection((0..n).map(|j| mask >> j & 1 == 1).collect()))
    }
}

/// The empirical sample: `N` cost realizations in `R^n_+`, each with mass `1/N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct EmpiricalDistribution {
    realizations: Vec<Vec<f64>>,
    dim: usize,
}

impl EmpiricalDistribution {
    pub fn new(realizations: Vec<Vec<f64>>) -> Result<Self> {
        let dim = realizations
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("an empirical distribution needs at least one realization"))?;
        for xi in &realizations {
            check_dim(dim, xi.len())?;
            if xi.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::invalid("realizations must be finite and nonnegative"));
            }
        }
        Ok(EmpiricalDistribution { realizations, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sample size `N`.
    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    pub fn realizations(&self) -> &[Vec<f64>] {
        &self.realizations
    }

    pub fn realization(&self, i: usize) -> &[f64] {
        &self.realizations[i]
    }

    /// Cost `xi_i · x` of every realization.
    pub fn costs(&self, x: &Selection) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        Ok(self.realizations.iter().map(|xi| x.cost(xi)).collect())
    }

    /// The aggregated cost vector `(1/N) sum_i xi_i`.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.len() as f64;
        (0..self.dim)
            .map(|j| self.realizations.iter().map(|xi| xi[j]).sum::<f64>() / n)
            .collect()
    }

    /// `sum_i ||xi_i - other_i||_q`
    pub fn transport_cost(&self, other: &EmpiricalDistribution, norm: Norm) -> Result<f64> {
        check_dim(self.dim, other.dim)?;
        check_dim(self.len(), other.len())?;
        Ok(self
            .realizations
            .iter()
            .zip(&other.realizations)
            .map(|(a, b)| {
                let diff: Vec<f64> = a.iter().zip(b).map(|(u, v)| u - v).collect();
                norm.eval(&diff)
            })
            .sum())
    }
}

impl TryFrom<Vec<Vec<f64>>> for EmpiricalDistribution {
    type Error = Error;
    fn try_from(value: Vec<Vec<f64>>) -> Result<Self> {
        EmpiricalDistribution::new(value)
    }
}

impl From<EmpiricalDistribution> for Vec<Vec<f64>> {
    fn from(value: EmpiricalDistribution) -> Self {
        value.realizations
    }
}

/// One row `normal · xi <= offset` of a polytope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// A bounded, nonempty polytope `{xi >= 0 : G xi <= h}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    rows: Vec<HalfSpace>,
    coordinate_max: Vec<f64>,
}

impl Polytope {
    /// Checks nonemptiness and boundedness by maximising every coordinate.
    pub fn new(dim: usize, rows: Vec<HalfSpace>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("polytope dimension must be positive"));
        }
        for r in &rows {
            check_dim(dim, r.normal.len())?;
        }
        let mut coordinate_max = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut lp = Self::base_lp(dim, &rows);
            lp.objective[j] = -1.0;
            let report = milp::solve_lp(&lp)?;
            match report.status {
                milp::Status::Optimal => coordinate_max.push(report.values[j].max(0.0)),
                milp::Status::Infeasible => return Err(Error::invalid("polytope support is empty")),
                _ => return Err(Error::invalid(format!("polytope support is unbounded along coordinate {j}"))),
            }
        }
        Ok(Polytope {
            rows,
            coordinate_max,
        })
    }

    /// LP over `xi` with the polytope rows and `xi >= 0`.
    pub(crate) fn base_lp(dim: usize, rows: &[HalfSpace]) -> LinearProgram {
        let mut lp = LinearProgram::new(dim);
        for r in rows {
            lp.add_row(r.normal.clone(), Relation::Le, r.offset);
        }
        lp
    }

    pub fn rows(&self) -> &[HalfSpace] {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.coordinate_max.len()
    }

    pub fn coordinate_max(&self) -> &[f64] {
        &self.coordinate_max
    }

    pub fn contains(&self, xi: &[f64], tol: f64) -> bool {
        xi.iter().all(|v| *v >= -tol)
            && self.rows.iter().all(|r| {
                let lhs: f64 = r.normal.iter().zip(xi).map(|(a, v)| a * v).sum();
                lhs <= r.offset + tol * (1.0 + r.offset.abs())
            })
    }
}

/// The support `Xi` of the cost vector.
#[derive(Clone, Debug, PartialEq)]
pub enum SupportSet {
    /// `R^n_+`
    Unrestricted,
    /// `{a <= xi <= b}` with `0 <= a <= b`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Polytope(Polytope),
}

impl SupportSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::invalid("box support needs at least one coordinate"));
        }
        for (a, b) in lower.iter().zip(&upper) {
            if !a.is_finite() || !b.is_finite() || *a < 0.0 || a > b {
                return Err(Error::invalid("box support needs finite bounds with 0 <= a <= b"));
            }
        }
        Ok(SupportSet::Box { lower, upper })
    }

    pub fn polytope(dim: usize, rows: Vec<HalfSpace>) -> Result<Self> {
        Ok(SupportSet::Polytope(Polytope::new(dim, rows)?))
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            SupportSet::Unrestricted => None,
            SupportSet::Box { upper, .. } => Some(upper.len()),
            SupportSet::Polytope(p) => Some(p.dim()),
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, SupportSet::Unrestricted)
    }

    /// Per-coordinate maxima over the support; `None` when unrestricted.
    pub fn coordinate_max(&self) -> Option<&[f64]> {
        match self {
            SupportSet::Unrestricted => None,
            SupportSet::Box { upper, .. } => Some(upper),
            SupportSet::Polytope(p) => Some(p.coordinate_max()),
        }
    }

    pub fn contains(&self, xi: &[f64], tol: f64) -> bool {
        match self {
            SupportSet::Unrestricted => xi.iter().all(|v| *v >= -tol),
            SupportSet::Box { lower, upper } => xi
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (a, b))| *v >= a - tol && *v <= b + tol),
            SupportSet::Polytope(p) => p.contains(xi, tol),
        }
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        match self.dim() {
            Some(d) => check_dim(d, n),
            None => Ok(()),
        }
    }
}

/// True iff every realization of `dist` lies in `support`.
pub fn validate_support_membership(dist: &EmpiricalDistribution, support: &SupportSet) -> Result<bool> {
    support.check_dim(dist.dim())?;
    Ok(dist
        .realizations()
        .iter()
        .all(|xi| support.contains(xi, FEASIBILITY_TOL)))
}

/// Ground norm of the Wasserstein distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    L1,
    L2,
    LInf,
}

impl Norm {
    pub fn eval(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|a| a.abs()).sum(),
            Norm::L2 => v.iter().map(|a| a * a).sum::<f64>().sqrt(),
            Norm::LInf => v.iter().fold(0.0, |m, a| m.max(a.abs())),
        }
    }

    /// The norm `q'` with `1/q + 1/q' = 1`.
    pub fn dual(self) -> Norm {
        match self {
            Norm::L1 => Norm::LInf,
            Norm::L2 => Norm::L2,
            Norm::LInf => Norm::L1,
        }
    }

    /// `1/q'`, the exponent in `||x||_{q'} = (sum x)^{1/q'}` for binary `x`.
    pub fn dual_exponent(self) -> f64 {
        match self {
            Norm::L1 => 0.0,
            Norm::L2 => 0.5,
            Norm::LInf => 1.0,
        }
    }

    /// `||x||_{q'}` for a 0-1 vector with `card` ones.
    pub fn dual_norm_of_binary(self, card: usize) -> f64 {
        if card == 0 {
            0.0
        } else {
            (card as f64).powf(self.dual_exponent())
        }
    }

    pub fn parse(s: &str) -> Result<Norm> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" => Ok(Norm::L1),
            "2" => Ok(Norm::L2),
            "inf" | "infinity" | "∞" => Ok(Norm::LInf),
            other => Err(Error::invalid(format!("unsupported norm index {other:?}; expected 1, 2 or inf"))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Norm::L1 => "1",
            Norm::L2 => "2",
            Norm::LInf => "inf",
        }
    }
}

/// Wasserstein ball radius and ground norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbiguitySpec {
    pub epsilon: f64,
    pub norm: Norm,
}

impl AmbiguitySpec {
    pub fn new(epsilon: f64, norm: Norm) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::invalid("epsilon must be finite and nonnegative"));
        }
        Ok(AmbiguitySpec { epsilon, norm })
    }

    /// Total displacement budget `N * epsilon` of the discrete ball.
    pub fn budget(&self, n_samples: usize) -> f64 {
        self.epsilon * n_samples as f64
    }
}

/// Returns the `l` with `(l-1)/N < alpha <= l/N`, and whether `alpha = l/N`.
pub fn risk_bracket(alpha: f64, n_samples: usize) -> Result<(usize, bool)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("risk level alpha = {alpha} is outside (0, 1]")));
    }
    if n_samples == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    let scaled = alpha * n_samples as f64;
    let nearest = scaled.round();
    if (scaled - nearest).abs() <= ALPHA_EXACT_TOL && nearest >= 1.0 {
        return Ok((nearest as usize, true));
    }
    let l = (scaled.ceil() as usize).clamp(1, n_samples);
    Ok((l, false))
}

/// Risk level `alpha` together with its bracket for a fixed sample size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskSpec {
    pub alpha: f64,
    pub n_samples: usize,
    pub l: usize,
    pub is_exact_fraction: bool,
}

impl RiskSpec {
    pub fn new(alpha: f64, n_samples: usize) -> Result<Self> {
        let (l, exact) = risk_bracket(alpha, n_samples)?;
        Ok(RiskSpec {
            alpha,
            n_samples,
            l,
            is_exact_fraction: exact,
        })
    }

    /// `gamma = N` if `alpha < 1/N`, else `1/alpha`; equals `N * w_1`.
    pub fn gamma(&self) -> f64 {
        (self.n_samples as f64).min(1.0 / self.alpha)
    }

    pub(crate) fn require_exact(&self) -> Result<()> {
        if self.is_exact_fraction {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "alpha = {} is not of the form l/N for N = {}; round it to {}/{} = {}",
                self.alpha,
                self.n_samples,
                self.l,
                self.n_samples,
                self.l as f64 / self.n_samples as f64
            )))
        }
    }
}

/// Structural tag of a feasible set, carrying the instance for specialised oracles.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemTag {
    Generic,
    Knapsack(KnapsackInstance),
    RepSelection(RepSelectionInstance),
    DagShortestPath(DagShortestPathInstance),
}

/// A binary feasible region `{x in {0,1}^n : rows}` known to be nonempty.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibleSet {
    n: usize,
    constraints: Vec<Row>,
    tag: ProblemTag,
}

impl FeasibleSet {
    /// Validates dimensions and proves feasibility with one MIP solve.
    pub fn new(n: usize, constraints: Vec<Row>, tag: ProblemTag) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("a feasible set needs at least one variable"));
        }
        for r in &constraints {
            check_dim(n, r.coefficients.len())?;
        }
        let set = FeasibleSet { n, constraints, tag };
        let model = set.embed(0, vec![0.0; n])?;
        let report = milp::BranchAndBound::new(f64::INFINITY).solve(&model)?;
        if !report.has_solution() {
            return Err(Error::invalid("the feasible set has no binary point"));
        }
        Ok(set)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn constraints(&self) -> &[Row] {
        &self.constraints
    }

    pub fn tag(&self) -> &ProblemTag {
        &self.tag
    }

    pub fn contains(&self, x: &Selection) -> bool {
        if x.len() != self.n {
            return false;
        }
        let v = x.to_values();
        self.constraints.iter().all(|r| r.is_satisfied(&v, 1e-9))
    }

    /// A mixed model whose first `n` variables are the binaries `x` and whose
    /// remaining `extra` variables are continuous (bounds `[0, inf)` unless
    /// changed). `objective` covers all `n + extra` variables.
    pub fn embed(&self, extra: usize, objective: Vec<f64>) -> Result<MixedModel> {
        let total = self.n + extra;
        check_dim(total, objective.len())?;
        let mut lp = LinearProgram::new(total);
        lp.objective = objective;
        for j in 0..self.n {
            lp.upper[j] = 1.0;
        }
        for r in &self.constraints {
            let mut coef = r.coefficients.clone();
            coef.resize(total, 0.0);
            lp.add_row(coef, r.relation, r.rhs);
        }
        MixedModel::new(lp, (0..self.n).collect())
    }

    /// Minimise `cost · x` over the set with the generic MIP core.
    pub fn minimize_linear(&self, cost: &[f64], gap_tol: f64) -> Result<(Selection, f64)> {
        check_dim(self.n, cost.len())?;
        let model = self.embed(0, cost.to_vec())?;
        let report = milp::solve_mixed(&model, gap_tol)?.into_solution()?;
        let x = Selection::from_values(&report.values);
        let value = x.cost(cost);
        Ok((x, value))
    }

    /// Every feasible point, by enumeration (test oracles, `n <= 20`).
    pub fn enumerate(&self) -> Vec<Selection> {
        assert!(self.n <= 20, "enumeration is limited to n <= 20");
        Selection::enumerate_all(self.n)
            .filter(|x| self.contains(x))
            .collect()
    }
}

/// A solution of one of the risk problems together with its solver log.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionReport {
    pub x: Selection,
    /// Objective of `x` re-evaluated with the closed-form evaluator of the problem.
    pub objective: f64,
    pub status: Status,
    /// Proven lower bound on the optimum.
    pub best_bound: f64,
    pub nodes: usize,
    pub cuts: usize,
    pub iterations: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl SolutionReport {
    pub(crate) fn from_mip(n: usize, report: &SolveReport, objective: f64) -> Self {
        SolutionReport {
            x: Selection::from_values(&report.values[..n]),
            objective,
            status: report.status,
            best_bound: report.best_bound.min(objective),
            nodes: report.nodes,
            cuts: report.cuts,
            iterations: 1,
            elapsed: report.elapsed,
        }
    }

    /// `objective - best_bound`, never negative.
    pub fn gap_abs(&self) -> f64 {
        (self.objective - self.best_bound).max(0.0)
    }
}
