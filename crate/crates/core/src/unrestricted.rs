//! Exact robust solvers when the support is all of `R^n_+`, plus the
//! two-solve method for box supports under the 1-norm.
//!
//! Over `R^n_+` the worst-case CVaR of `x` is `CVaR(x) + gamma * eps * ||x||_{q'}`.
//! For binary `x` the norm only depends on `sum x`, so fixing `sum x <= lambda`
//! turns the problem into one MIP per cardinality `lambda`.

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::milp::{self, MixedModel, Relation, Status};
use crate::model::{AmbiguitySpec, EmpiricalDistribution, FeasibleSet, Norm, RiskSpec, Selection, SolutionReport};
use crate::problems::solve_det;
use crate::risk::{cvar_model, solve_cvar};
use crate::worst_case::{closed_form_box_q1, worst_value_unrestricted};

/// Per-cardinality solves of a lambda family.
#[derive(Clone, Debug)]
pub struct LambdaFamilyReport {
    /// `(lambda, family objective, report)`; the report is `None` when `sum x <= lambda` is infeasible.
    pub per_lambda: Vec<(usize, f64, Option<SolutionReport>)>,
    pub winning_lambda: usize,
    /// Winning solution; its `objective` is the family objective at `winning_lambda`.
    pub solution: SolutionReport,
}

/// Minimum and maximum of `sum x` over the feasible set.
pub fn cardinality_range(set: &FeasibleSet) -> Result<(usize, usize)> {
    let n = set.n();
    let (_, lo) = set.minimize_linear(&vec![1.0; n], 0.0)?;
    let (_, hi) = set.minimize_linear(&vec![-1.0; n], 0.0)?;
    Ok((lo.round() as usize, (-hi).round() as usize))
}

fn with_cardinality_cap(model: &MixedModel, n: usize, lambda: usize) -> MixedModel {
    let mut coef = vec![0.0; model.lp.num_vars()];
    coef[..n].iter_mut().for_each(|c| *c = 1.0);
    model.with_rows([milp::Row::new(coef, Relation::Le, lambda as f64)])
}

/// Solve `min_lambda [ min { base(x) : sum x <= lambda } + weight * lambda^{1/q'} ]`.
fn lambda_family(
    set: &FeasibleSet,
    base: &MixedModel,
    weight: f64,
    norm: Norm,
    gap_tol: f64,
) -> Result<LambdaFamilyReport> {
    let (lo, hi) = cardinality_range(set)?;
    let n = set.n();
    let solved: Vec<Result<(usize, f64, Option<SolutionReport>)>> = (lo..=hi)
        .into_par_iter()
        .map(|lambda| {
            let model = with_cardinality_cap(base, n, lambda);
            let report = milp::solve_mixed(&model, gap_tol)?;
            if report.status == Status::Infeasible {
                return Ok((lambda, f64::INFINITY, None));
            }
            let report = report.into_solution()?;
            let shift = weight * norm.dual_norm_of_binary(lambda);
            let mut sol = SolutionReport::from_mip(n, &report, report.objective + shift);
            sol.best_bound = report.best_bound + shift;
            Ok((lambda, sol.objective, Some(sol)))
        })
        .collect();
    let per_lambda = solved.into_iter().collect::<Result<Vec<_>>>()?;
    let (winning_lambda, _, best) = per_lambda
        .iter()
        .filter(|(_, _, s)| s.is_some())
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or(Error::Infeasible)?;
    let mut solution = best.clone().expect("filtered");
    solution.best_bound = per_lambda
        .iter()
        .filter_map(|(_, _, s)| s.as_ref().map(|s| s.best_bound))
        .fold(f64::INFINITY, f64::min);
    solution.nodes = per_lambda.iter().filter_map(|(_, _, s)| s.as_ref().map(|s| s.nodes)).sum();
    solution.iterations = per_lambda.len();
    Ok(LambdaFamilyReport {
        winning_lambda: *winning_lambda,
        per_lambda,
        solution,
    })
}

/// The lambda family for the worst-case CVaR over `R^n_+`, for any norm.
pub fn cvar_lambda_family(
    set: &FeasibleSet,
    dist: &EmpiricalDistribution,
    spec: &AmbiguitySpec,
    alpha: f64,
    gap_tol: f64,
) -> Result<LambdaFamilyReport> {
    let risk = RiskSpec::new(alpha, dist.len())?;
    let base = cvar_model(set, dist, alpha)?;
    lambda_family(set, &base, risk.gamma() * spec.epsilon, spec.norm, gap_tol)
}

/// The lambda family for the worst-case expectation over `R^n_+`.
pub fn expectation_lambda_family(
    set: &FeasibleSet,
    dist: &EmpiricalDistribution,
    spec: &AmbiguitySpec,
    gap_tol: f64,
) -> Result<LambdaFamilyReport> {
    check_dim(set.n(), dist.dim())?;
    let base = set.embed(0, dist.mean())?;
    lambda_family(set, &base, spec.epsilon, spec.norm, gap_tol)
}

fn zero_if_feasible(set: &FeasibleSet) -> Option<Selection> {
    let zero = Selection::zeros(set.n());
    set.contains(&zero).then_some(zero)
}

fn zero_report(x: Selection) -> SolutionReport {
    SolutionReport {
        x,
        objective: 0.0,
        status: Status::Optimal,
        best_bound: 0.0,
        nodes: 0,
        cuts: 0,
        iterations: 1,
        elapsed: Default::default(),
    }
}

/// Minimise the worst-case CVaR over the ball around `dist` when the support is `R^n_+`.
pub fn solve_distr_unrestricted(
    set: &FeasibleSet,
    dist: &EmpiricalDistribution,
    spec: &AmbiguitySpec,
    alpha: f64,
    gap_tol: f64,
) -> Result<SolutionReport> {
    check_dim(set.n(), dist.dim())?;
    let risk = RiskSpec::new(alpha, dist.len())?;
    let weight = risk.gamma() * spec.epsilon;
    let mut report = if spec.epsilon == 0.0 {
        solve_cvar(set, dist, alpha, gap_tol)?
    } else {
        match spec.norm {
            Norm::L1 => {
                // costs are nonnegative, so x = 0 is optimal whenever it is feasible
                if let Some(zero) = zero_if_feasible(set) {
                    return Ok(zero_report(zero));
                }
                let mut r = solve_cvar(set, dist, alpha, gap_tol)?;
                r.best_bound += weight;
                r
            }
            Norm::LInf => {
                let mut model = cvar_model(set, dist, alpha)?;
                model.lp.objective[..set.n()].iter_mut().for_each(|c| *c += weight);
                let report = milp::solve_mixed(&model, gap_tol)?.into_solution()?;
                SolutionReport::from_mip(set.n(), &report, report.objective)
            }
            Norm::L2 => cvar_lambda_family(set, dist, spec, alpha, gap_tol)?.solution,
        }
    };
    report.objective = worst_value_unrestricted(&report.x, dist, spec, alpha)?;
    report.best_bound = report.best_bound.min(report.objective);
    Ok(report)
}

/// Minimise `mean · x + eps * ||x||_{q'}`, the worst-case expectation over `R^n_+`.
pub fn solve_expectation_unrestricted(
    set: &FeasibleSet,
    dist: &EmpiricalDistribution,
    spec: &AmbiguitySpec,
    gap_tol: f64,
) -> Result<SolutionReport> {
    check_dim(set.n(), dist.dim())?;
    let mean = dist.mean();
    let objective_of = |x: &Selection| x.cost(&mean) + spec.epsilon * spec.norm.dual_norm_of_binary(x.cardinality());
    let x = match spec.norm {
        _ if spec.epsilon == 0.0 => solve_det(set, &mean, gap_tol)?.0,
        Norm::L1 => match zero_if_feasible(set) {
            Some(zero) => zero,
            None => solve_det(set, &mean, gap_tol)?.0,
        },
        Norm::LInf => {
            let shifted: Vec<f64> = mean.iter().map(|m| m + spec.epsilon).collect();
            solve_det(set, &shifted, gap_tol)?.0
        }
        Norm::L2 => expectation_lambda_family(set, dist, spec, gap_tol)?.solution.x,
    };
    let objective = objective_of(&x);
    Ok(SolutionReport {
        x,
        objective,
        status: Status::Optimal,
        best_bound: objective - gap_tol.max(0.0),
        nodes: 0,
        cuts: 0,
        iterations: 1,
        elapsed: Default::default(),
    })
}

/// The worst-case expectation minimiser, a `gamma = min(N, 1/alpha)` approximation
/// of the worst-case CVaR problem. Returns the solution and `gamma`.
pub fn gamma_approx_heuristic(
    set: &FeasibleSet,
    dist: &EmpiricalDistribution,
    spec: &AmbiguitySpec,
    alpha: f64,
    gap_tol: f64,
) -> Result<(Selection, f64)> {
    let risk = RiskSpec::new(alpha, dist.len())?;
    let report = solve_expectation_unrestricted(set, dist, spec, gap_tol)?;
    Ok((report.x, risk.gamma()))
}

/// Box support `[a, b]`, 1-norm, `alpha = l/N`: the better of the minimiser of
/// `b · x` and the empirical CVaR minimiser under `min(b · x, CVaR + N eps / l)`.
/// Ties go to the CVaR minimiser.
pub fn solve_box_q1_two_solve(
    set: &FeasibleSet,
    dist: &EmpiricalDistribution,
    upper: &[f64],
    epsilon: f64,
    alpha: f64,
    gap_tol: f64,
) -> Result<SolutionReport> {
    check_dim(set.n(), dist.dim())?;
    check_dim(set.n(), upper.len())?;
    let risk = RiskSpec::new(alpha, dist.len())?;
    risk.require_exact()?;
    let (x1, _) = solve_det(set, upper, gap_tol)?;
    let v1 = closed_form_box_q1(&x1, dist, upper, epsilon, risk.l)?;
    let cvar = solve_cvar(set, dist, alpha, gap_tol)?;
    let v2 = closed_form_box_q1(&cvar.x, dist, upper, epsilon, risk.l)?;
    let (x, objective) = if v2 <= v1 { (cvar.x.clone(), v2) } else { (x1, v1) };
    Ok(SolutionReport {
        x,
        objective,
        status: cvar.status,
        best_bound: objective - gap_tol.max(0.0),
        nodes: cvar.nodes,
        cuts: 0,
        iterations: 2,
        elapsed: cvar.elapsed,
    })
}
