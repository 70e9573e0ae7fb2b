//! Approximation by a distorted sample.
//!
//! Every sample point is moved a `1/c` fraction of the way towards a costly
//! support point `xi_bar`, with `c` the smallest value for which the moved
//! sample stays in the ball. Minimising the empirical CVaR of the moved sample
//! gives a `b·c`-approximation of the robust problem, where
//! `b = zeta·x / xi_bar·x` and `zeta` holds the per-coordinate support maxima.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::milp::{self, Relation, Status};
use crate::model::{
    validate_support_membership, AmbiguitySpec, EmpiricalDistribution, FeasibleSet, Polytope, RiskSpec,
    SolutionReport, SupportSet,
};
use crate::risk::solve_cvar;

/// How the target point `xi_bar` is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum XiBarStrategy {
    /// Maximise `1 · xi` over the support (lexicographically largest among ties).
    #[default]
    MaxSum,
    /// Minimise the max-norm distance to `zeta`.
    ClosestToZeta,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistortionPlan {
    pub xi_bar: Vec<f64>,
    pub c: f64,
    pub zeta: Vec<f64>,
    pub distorted: EmpiricalDistribution,
    pub strategy: XiBarStrategy,
}

/// Outcome of [`solve_distr_approx`].
#[derive(Clone, Debug, Serialize)]
pub struct ApproxSolution {
    /// `objective` is the empirical CVaR on the distorted sample.
    pub report: SolutionReport,
    pub plan: DistortionPlan,
    /// `zeta·x / xi_bar·x`; `None` when `xi_bar·x = 0`.
    pub b: Option<f64>,
    /// `b·c`; `None` when uncertified.
    pub certified_ratio: Option<f64>,
}

fn lexicographic_max(p: &Polytope, dim: usize) -> Result<Vec<f64>> {
    let mut lp = Polytope::base_lp(dim, p.rows());
    lp.objective = vec![-1.0; dim];
    let best = milp::solve_lp(&lp)?;
    if best.status != Status::Optimal {
        return Err(Error::Solver(format!("support maximisation ended with {:?}", best.status)));
    }
    let total = -best.objective;
    lp.add_row(vec![1.0; dim], Relation::Ge, total - 1e-9 * (1.0 + total.abs()));
    let mut point = best.values;
    for j in 0..dim {
        lp.objective = vec![0.0; dim];
        lp.objective[j] = -1.0;
        let r = milp::solve_lp(&lp)?;
        if r.status != Status::Optimal {
            break;
        }
        let v = r.values[j];
        point = r.values;
        let mut coef = vec![0.0; dim];
        coef[j] = 1.0;
        lp.add_row(coef, Relation::Ge, v - 1e-9 * (1.0 + v.abs()));
    }
    Ok(point)
}

fn closest_to(p: &Polytope, zeta: &[f64]) -> Result<Vec<f64>> {
    let dim = zeta.len();
    // variables: xi (dim), s
    let mut lp = Polytope::base_lp(dim, p.rows());
    lp.objective.push(1.0);
    lp.lower.push(0.0);
    lp.upper.push(f64::INFINITY);
    for row in &mut lp.rows {
        row.coefficients.push(0.0);
    }
    for (j, z) in zeta.iter().enumerate() {
        let mut coef = vec![0.0; dim + 1];
        coef[j] = 1.0;
        coef[dim] = 1.0;
        lp.add_row(coef, Relation::Ge, *z);
    }
    let r = milp::solve_lp(&lp)?;
    if r.status != Status::Optimal {
        return Err(Error::Solver(format!("distance LP ended with {:?}", r.status)));
    }
    Ok(r.values[..dim].to_vec())
}

fn target_point(support: &SupportSet, strategy: XiBarStrategy) -> Result<(Vec<f64>, Vec<f64>)> {
    match support {
        SupportSet::Box { upper, .. } => Ok((upper.clone(), upper.clone())),
        SupportSet::Polytope(p) => {
            let zeta = p.coordinate_max().to_vec();
            let xi_bar = match strategy {
                XiBarStrategy::MaxSum => lexicographic_max(p, p.dim())?,
                XiBarStrategy::ClosestToZeta => closest_to(p, &zeta)?,
            };
            let xi_bar = xi_bar.into_iter().map(|v| v.max(0.0)).collect();
            Ok((xi_bar, zeta))
        }
        SupportSet::Unrestricted => Err(Error::invalid("the distorted sample needs a bounded support")),
    }
}

fn distort(dist: &EmpiricalDistribution, xi_bar: &[f64], c: f64) -> Result<EmpiricalDistribution> {
    if c.is_infinite() {
        return Ok(dist.clone());
    }
    let keep = (c - 1.0) / c;
    EmpiricalDistribution::new(
        dist.realizations()
            .iter()
            .map(|xi| xi.iter().zip(xi_bar).map(|(a, t)| (keep * a + t / c).max(0.0)).collect())
            .collect(),
    )
}

fn check_inputs(dist: &EmpiricalDistribution, support: &SupportSet) -> Result<()> {
    support.check_dim(dist.dim())?;
    if !support.is_bounded() {
        return Err(Error::invalid("the distorted sample needs a bounded support"));
    }
    if !validate_support_membership(dist, support)? {
        return Err(Error::invalid("every sample must lie in the support"));
    }
    Ok(())
}

pub fn build_plan(
    dist: &EmpiricalDistribution,
    support: &SupportSet,
    spec: &AmbiguitySpec,
    risk: &RiskSpec,
) -> Result<DistortionPlan> {
    build_plan_with(dist, support, spec, risk, XiBarStrategy::default())
}

pub fn build_plan_with(
    dist: &EmpiricalDistribution,
    support: &SupportSet,
    spec: &AmbiguitySpec,
    risk: &RiskSpec,
    strategy: XiBarStrategy,
) -> Result<DistortionPlan> {
    check_inputs(dist, support)?;
    check_dim(dist.len(), risk.n_samples)?;
    if spec.epsilon == 0.0 {
        return Err(Error::invalid(
            "the distortion constant is undefined for epsilon = 0; solve the empirical CVaR problem instead",
        ));
    }
    let (xi_bar, zeta) = target_point(support, strategy)?;
    let reach = spec.budget(dist.len()) / risk.l as f64;
    let c = dist
        .realizations()
        .iter()
        .map(|xi| {
            let diff: Vec<f64> = xi_bar.iter().zip(xi).map(|(a, b)| a - b).collect();
            spec.norm.eval(&diff) / reach
        })
        .fold(1.0, f64::max);
    let distorted = distort(dist, &xi_bar, c)?;
    Ok(DistortionPlan {
        xi_bar,
        c,
        zeta,
        distorted,
        strategy,
    })
}

fn solve_plan(set: &FeasibleSet, plan: DistortionPlan, risk: &RiskSpec, gap_tol: f64, boxed: bool) -> Result<ApproxSolution> {
    let report = solve_cvar(set, &plan.distorted, risk.alpha, gap_tol)?;
    let bar = report.x.cost(&plan.xi_bar);
    let b = if boxed {
        Some(1.0)
    } else if bar > 0.0 {
        Some((report.x.cost(&plan.zeta) / bar).max(1.0))
    } else {
        None
    };
    let certified_ratio = b.map(|b| b * plan.c);
    Ok(ApproxSolution {
        report,
        plan,
        b,
        certified_ratio,
    })
}

/// Minimise the empirical CVaR of the distorted sample and certify the ratio `b·c`.
pub fn solve_distr_approx(
    set: &FeasibleSet,
    dist: &EmpiricalDistribution,
    support: &SupportSet,
    spec: &AmbiguitySpec,
    risk: &RiskSpec,
    gap_tol: f64,
) -> Result<ApproxSolution> {
    solve_distr_approx_with(set, dist, support, spec, risk, gap_tol, XiBarStrategy::default())
}

pub fn solve_distr_approx_with(
    set: &FeasibleSet,
    dist: &EmpiricalDistribution,
    support: &SupportSet,
    spec: &AmbiguitySpec,
    risk: &RiskSpec,
    gap_tol: f64,
    strategy: XiBarStrategy,
) -> Result<ApproxSolution> {
    check_dim(set.n(), dist.dim())?;
    let plan = build_plan_with(dist, support, spec, risk, strategy)?;
    solve_plan(set, plan, risk, gap_tol, matches!(support, SupportSet::Box { .. }))
}

/// The same pipeline with a caller-chosen `c >= 1` (`f64::INFINITY` keeps the
/// sample unchanged). No ratio is certified.
pub fn solve_with_custom_c(
    set: &FeasibleSet,
    dist: &EmpiricalDistribution,
    support: &SupportSet,
    c_override: f64,
    risk: &RiskSpec,
    gap_tol: f64,
) -> Result<SolutionReport> {
    check_dim(set.n(), dist.dim())?;
    check_inputs(dist, support)?;
    if c_override.is_nan() || c_override < 1.0 {
        return Err(Error::invalid("the distortion constant must be at least 1"));
    }
    let (xi_bar, _) = target_point(support, XiBarStrategy::default())?;
    let distorted = distort(dist, &xi_bar, c_override)?;
    solve_cvar(set, &distorted, risk.alpha, gap_tol)
}
