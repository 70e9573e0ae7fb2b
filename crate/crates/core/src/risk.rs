//! CVaR of a fixed discrete distribution: closed form, LP form, MIP minimisation.

use crate::error::{check_dim, Error, Result};
use crate::milp::{self, LinearProgram, MixedModel, Relation, Status};
use crate::model::{risk_bracket, EmpiricalDistribution, FeasibleSet, RiskSpec, Selection, SolutionReport};
use crate::problems::solve_det;

/// Nonincreasing weights that turn sorted costs into CVaR.
#[derive(Clone, Debug, PartialEq)]
pub struct OwaWeights(Vec<f64>);

impl OwaWeights {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Number of positive weights.
    pub fn support(&self) -> usize {
        self.0.iter().take_while(|w| **w > 0.0).count()
    }
}

pub fn owa_weights(alpha: f64, n_samples: usize) -> Result<OwaWeights> {
    let (l, _) = risk_bracket(alpha, n_samples)?;
    let mut w = vec![0.0; n_samples];
    let an = alpha * n_samples as f64;
    if an < 1.0 {
        w[0] = 1.0;
        return Ok(OwaWeights(w));
    }
    let head = 1.0 / an;
    for wi in w.iter_mut().take(l - 1) {
        *wi = head;
    }
    w[l - 1] = (1.0 - (l - 1) as f64 * head).max(0.0);
    Ok(OwaWeights(w))
}

/// Indices of `costs` sorted by decreasing cost, ties by increasing index.
pub fn descending_order(costs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs[b].total_cmp(&costs[a]).then(a.cmp(&b)));
    order
}

/// CVaR of a uniform distribution over `costs`.
pub fn cvar_of_costs(costs: &[f64], alpha: f64) -> Result<f64> {
    let w = owa_weights(alpha, costs.len())?;
    Ok(descending_order(costs)
        .into_iter()
        .zip(w.as_slice())
        .map(|(i, wi)| wi * costs[i])
        .sum())
}

pub fn cvar_discrete(dist: &EmpiricalDistribution, x: &Selection, alpha: f64) -> Result<f64> {
    cvar_of_costs(&dist.costs(x)?, alpha)
}

/// `min t + 1/(alpha N) sum u_i  s.t.  u_i >= xi_i·x - t, u >= 0` via the simplex.
pub fn cvar_lp(dist: &EmpiricalDistribution, x: &Selection, alpha: f64) -> Result<f64> {
    let costs = dist.costs(x)?;
    let (_, _) = risk_bracket(alpha, costs.len())?;
    let n = costs.len();
    let mut lp = LinearProgram::new(1 + n);
    lp.lower[0] = f64::NEG_INFINITY;
    lp.objective[0] = 1.0;
    let scale = 1.0 / (alpha * n as f64);
    for i in 0..n {
        lp.objective[1 + i] = scale;
        let mut coef = vec![0.0; 1 + n];
        coef[0] = 1.0;
        coef[1 + i] = 1.0;
        lp.add_row(coef, Relation::Ge, costs[i]);
    }
    let report = milp::solve_lp(&lp)?;
    if report.status != Status::Optimal {
        let model = MixedModel::new(lp, Vec::new())?;
        return Err(Error::Solver(format!(
            "CVaR LP ended with status {:?}\n{}",
            report.status,
            milp::write_lp_text(&model)
        )));
    }
    Ok(report.objective)
}

/// The CVaR minimisation MIP over `[x (n) | t | u (N)]`.
pub(crate) fn cvar_model(set: &FeasibleSet, dist: &EmpiricalDistribution, alpha: f64) -> Result<MixedModel> {
    check_dim(set.n(), dist.dim())?;
    let (n, big_n) = (set.n(), dist.len());
    risk_bracket(alpha, big_n)?;
    let mut objective = vec![0.0; n + 1 + big_n];
    objective[n] = 1.0;
    let scale = 1.0 / (alpha * big_n as f64);
    for o in objective.iter_mut().skip(n + 1) {
        *o = scale;
    }
    let mut model = set.embed(1 + big_n, objective)?;
    // costs are nonnegative, so the optimal t (a quantile) is too
    for (i, xi) in dist.realizations().iter().enumerate() {
        let mut coef = vec![0.0; n + 1 + big_n];
        for j in 0..n {
            coef[j] = -xi[j];
        }
        coef[n] = 1.0;
        coef[n + 1 + i] = 1.0;
        model.lp.add_row(coef, Relation::Ge, 0.0);
    }
    Ok(model)
}

/// Minimise the empirical CVaR over the feasible set.
pub fn solve_cvar(set: &FeasibleSet, dist: &EmpiricalDistribution, alpha: f64, gap_tol: f64) -> Result<SolutionReport> {
    let model = cvar_model(set, dist, alpha)?;
    let report = milp::solve_mixed(&model, gap_tol)?.into_solution()?;
    let x = Selection::from_values(&report.values[..set.n()]);
    let objective = cvar_discrete(dist, &x, alpha)?;
    Ok(SolutionReport::from_mip(set.n(), &report, objective))
}

/// Solve the deterministic problem under the mean cost vector; returns the
/// solution and the a-priori ratio bound `min(N, 1/alpha)`.
pub fn mean_heuristic(
    set: &FeasibleSet,
    dist: &EmpiricalDistribution,
    alpha: f64,
    gap_tol: f64,
) -> Result<(Selection, f64)> {
    check_dim(set.n(), dist.dim())?;
    let risk = RiskSpec::new(alpha, dist.len())?;
    let (x, _) = solve_det(set, &dist.mean(), gap_tol)?;
    Ok((x, risk.gamma()))
}
