//! The adversary: a worst distribution in the Wasserstein ball for a fixed `x`.
//!
//! For `alpha = l/N` the worst-case CVaR is the best average, over index sets
//! `A` with `|A| = l`, of the lifted costs `(xi_i + delta_i) · x`, where the
//! displacements share the budget `N * epsilon`. Small instances enumerate
//! every `A` and solve the inner lift in closed form (or by Frank-Wolfe for
//! the Euclidean norm); larger ones and polytope supports go through a mixed
//! 0-1 linearisation.

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::milp::{self, LinearProgram, MixedModel, Relation, Row};
use crate::model::{AmbiguitySpec, EmpiricalDistribution, Norm, Polytope, RiskSpec, Selection, SupportSet};
use crate::risk::{cvar_discrete, descending_order};

/// Largest number of subsets that is enumerated exactly.
pub const ENUMERATION_LIMIT: u128 = 200_000;
const FW_MAX_ITER: usize = 10_000;
const FW_REL_TOL: f64 = 1e-6;
const KELLEY_MAX_ROUNDS: usize = 50;
const KELLEY_REL_TOL: f64 = 1e-6;
/// Slack allowed on the transport budget of a certificate.
pub const BUDGET_TOL: f64 = 1e-6;

/// A worst distribution for a fixed solution and its CVaR.
#[derive(Clone, Debug, Serialize)]
pub struct WorstCaseCertificate {
    pub distribution: EmpiricalDistribution,
    pub value: f64,
    /// Indices of the lifted realizations, increasing.
    pub active_subset: Vec<usize>,
    /// `sum_i ||xi_i - hat xi_i||_q`
    pub budget_used: f64,
}

impl WorstCaseCertificate {
    fn assemble(
        dist: &EmpiricalDistribution,
        realizations: Vec<Vec<f64>>,
        x: &Selection,
        alpha: f64,
        norm: Norm,
        mut active_subset: Vec<usize>,
    ) -> Result<Self> {
        let distribution = EmpiricalDistribution::new(realizations)?;
        let value = cvar_discrete(&distribution, x, alpha)?;
        let budget_used = distribution.transport_cost(dist, norm)?;
        active_subset.sort_unstable();
        Ok(WorstCaseCertificate {
            distribution,
            value,
            active_subset,
            budget_used,
        })
    }

    fn unmoved(dist: &EmpiricalDistribution, x: &Selection, alpha: f64, l: usize) -> Result<Self> {
        let order = descending_order(&dist.costs(x)?);
        Self::assemble(dist, dist.realizations().to_vec(), x, alpha, Norm::L1, order[..l].to_vec())
    }
}

/// Result of the inner maximisation for a fixed index set.
#[derive(Clone, Debug, PartialEq)]
pub struct Lift {
    /// One displacement vector (length `n`) per member of the index set, in order.
    pub deltas: Vec<Vec<f64>>,
    /// `sum_i delta_i · x`
    pub gain: f64,
}

/// Headroom `b_j - hat xi_ij` on the selected coordinates of one realization.
#[derive(Clone, Debug)]
struct Headroom {
    /// Sorted increasing, zeros dropped.
    sorted: Vec<f64>,
    /// `prefix[m] = sum of the m smallest`, `prefix_sq` likewise for squares.
    prefix: Vec<f64>,
    prefix_sq: Vec<f64>,
}

impl Headroom {
    fn new(raw: impl Iterator<Item = f64>) -> Self {
        let mut sorted: Vec<f64> = raw.filter(|h| *h > 0.0).collect();
        sorted.sort_by(f64::total_cmp);
        let mut prefix = vec![0.0];
        let mut prefix_sq = vec![0.0];
        for h in &sorted {
            prefix.push(prefix.last().unwrap() + h);
            prefix_sq.push(prefix_sq.last().unwrap() + h * h);
        }
        Headroom {
            sorted,
            prefix,
            prefix_sq,
        }
    }

    fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    fn l2_cap(&self) -> f64 {
        self.prefix_sq.last().unwrap().sqrt()
    }

    /// Euclidean lift of radius `t`: water level `mu`, gain, and marginal gain.
    fn l2_level(&self, t: f64) -> (f64, f64, f64) {
        let k = self.sorted.len();
        if k == 0 {
            return (0.0, 0.0, 0.0);
        }
        if t <= 0.0 {
            return (0.0, 0.0, (k as f64).sqrt());
        }
        if t >= self.l2_cap() {
            return (self.sorted[k - 1], self.total(), 0.0);
        }
        let t2 = t * t;
        let mut m = 0;
        while m < k && self.prefix_sq[m] + (k - m) as f64 * self.sorted[m] * self.sorted[m] < t2 {
            m += 1;
        }
        let rest = (k - m) as f64;
        let mu = ((t2 - self.prefix_sq[m]) / rest).max(0.0).sqrt();
        let gain = self.prefix[m] + rest * mu;
        (mu, gain, if mu > 0.0 { t / mu } else { rest.sqrt() })
    }
}

fn headrooms(x: &Selection, dist: &EmpiricalDistribution, upper: &[f64], subset: &[usize]) -> Vec<Headroom> {
    subset
        .iter()
        .map(|&i| {
            let xi = dist.realization(i);
            Headroom::new(x.indices().map(|j| (upper[j] - xi[j]).max(0.0)))
        })
        .collect()
}

/// Gain and per-member radii of the inner lift (radius = norm of the displacement).
fn lift_radii(rooms: &[Headroom], budget: f64, norm: Norm) -> (f64, Vec<f64>) {
    match norm {
        Norm::L1 => {
            let mut left = budget;
            let radii: Vec<f64> = rooms
                .iter()
                .map(|r| {
                    let take = r.total().min(left).max(0.0);
                    left -= take;
                    take
                })
                .collect();
            (radii.iter().sum(), radii)
        }
        Norm::LInf => {
            // concave piecewise-linear gain per member; fill segments by slope
            let mut segments: Vec<(usize, usize, f64)> = Vec::new();
            for (a, r) in rooms.iter().enumerate() {
                let k = r.sorted.len();
                let mut prev = 0.0;
                for (m, &h) in r.sorted.iter().enumerate() {
                    if h > prev {
                        segments.push((k - m, a, h - prev));
                        prev = h;
                    }
                }
            }
            segments.sort_by(|p, q| q.0.cmp(&p.0).then(p.1.cmp(&q.1)));
            let mut radii = vec![0.0; rooms.len()];
            let mut left = budget;
            let mut gain = 0.0;
            for (slope, a, len) in segments {
                if left <= 0.0 {
                    break;
                }
                let take = len.min(left);
                radii[a] += take;
                gain += slope as f64 * take;
                left -= take;
            }
            (gain, radii)
        }
        Norm::L2 => frank_wolfe(rooms, budget),
    }
}

/// Maximise `sum_a g_a(t_a)` over `0 <= t_a <= cap_a`, `sum t_a <= budget`.
fn frank_wolfe(rooms: &[Headroom], budget: f64) -> (f64, Vec<f64>) {
    let caps: Vec<f64> = rooms.iter().map(Headroom::l2_cap).collect();
    let value_at = |t: &[f64]| -> f64 { rooms.iter().zip(t).map(|(r, ti)| r.l2_level(*ti).1).sum() };
    let mut t = vec![0.0; rooms.len()];
    if budget <= 0.0 {
        return (0.0, t);
    }
    let mut order: Vec<usize> = (0..rooms.len()).collect();
    for _ in 0..FW_MAX_ITER {
        let grad: Vec<f64> = rooms.iter().zip(&t).map(|(r, ti)| r.l2_level(*ti).2).collect();
        order.sort_by(|&a, &b| grad[b].total_cmp(&grad[a]).then(a.cmp(&b)));
        let mut vertex = vec![0.0; rooms.len()];
        let mut left = budget;
        for &a in &order {
            if grad[a] <= 0.0 || left <= 0.0 {
                break;
            }
            vertex[a] = caps[a].min(left);
            left -= vertex[a];
        }
        let dir: Vec<f64> = vertex.iter().zip(&t).map(|(s, ti)| s - ti).collect();
        let gap: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        let value = value_at(&t);
        if gap <= FW_REL_TOL * (1.0 + value.abs()) {
            break;
        }
        let slope = |step: f64| -> f64 {
            rooms
                .iter()
                .zip(t.iter().zip(&dir))
                .map(|(r, (ti, d))| r.l2_level((ti + step * d).clamp(0.0, r.l2_cap())).2 * d)
                .sum()
        };
        let step = if slope(1.0) >= 0.0 {
            1.0
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if slope(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        for (ti, d) in t.iter_mut().zip(&dir) {
            *ti += step * d;
        }
    }
    for (ti, cap) in t.iter_mut().zip(&caps) {
        *ti = ti.clamp(0.0, *cap);
    }
    let total: f64 = t.iter().sum();
    if total > budget {
        let s = budget / total;
        t.iter_mut().for_each(|ti| *ti *= s);
    }
    (value_at(&t), t)
}

/// Displacement of one realization with the given radius.
fn lift_vector(x: &Selection, xi: &[f64], upper: &[f64], radius: f64, norm: Norm, room: &Headroom) -> Vec<f64> {
    let mut delta = vec![0.0; xi.len()];
    match norm {
        Norm::L1 => {
            let mut left = radius;
            for j in x.indices() {
                let take = (upper[j] - xi[j]).max(0.0).min(left);
                delta[j] = take;
                left -= take;
            }
        }
        Norm::LInf => {
            for j in x.indices() {
                delta[j] = (upper[j] - xi[j]).max(0.0).min(radius);
            }
        }
        Norm::L2 => {
            let (mu, _, _) = room.l2_level(radius);
            for j in x.indices() {
                delta[j] = (upper[j] - xi[j]).max(0.0).min(mu);
            }
        }
    }
    delta
}

/// Maximise `sum_{i in subset} delta_i · x` subject to `sum ||delta_i||_q <= budget`
/// and `0 <= delta_ij <= upper_j - hat xi_ij` on coordinates with `x_j = 1`.
pub fn inner_lift(
    x: &Selection,
    subset: &[usize],
    dist: &EmpiricalDistribution,
    upper: &[f64],
    budget: f64,
    norm: Norm,
) -> Result<Lift> {
    check_dim(dist.dim(), x.len())?;
    check_dim(dist.dim(), upper.len())?;
    if subset.iter().any(|&i| i >= dist.len()) {
        return Err(Error::invalid("subset index out of range"));
    }
    if !budget.is_finite() || budget < 0.0 {
        return Err(Error::invalid("lift budget must be finite and nonnegative"));
    }
    let rooms = headrooms(x, dist, upper, subset);
    let (gain, radii) = lift_radii(&rooms, budget, norm);
    let deltas = subset
        .iter()
        .zip(radii.iter().zip(&rooms))
        .map(|(&i, (r, room))| lift_vector(x, dist.realization(i), upper, *r, norm, room))
        .collect();
    Ok(Lift { deltas, gain })
}

/// `min(b · x, CVaR + N epsilon / l)`: the worst-case CVaR for box supports under the 1-norm.
pub fn closed_form_box_q1(
    x: &Selection,
    dist: &EmpiricalDistribution,
    upper: &[f64],
    epsilon: f64,
    l: usize,
) -> Result<f64> {
    check_dim(dist.dim(), upper.len())?;
    let big_n = dist.len();
    if l == 0 || l > big_n {
        return Err(Error::invalid(format!("l = {l} must lie in 1..={big_n}")));
    }
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::invalid("epsilon must be finite and nonnegative"));
    }
    let zero_box = SupportSet::boxed(vec![0.0; upper.len()], upper.to_vec())?;
    if !crate::model::validate_support_membership(dist, &zero_box)? {
        return Err(Error::invalid("every sample must lie below the box upper bounds"));
    }
    let cvar = cvar_discrete(dist, x, l as f64 / big_n as f64)?;
    Ok(x.cost(upper).min(cvar + big_n as f64 * epsilon / l as f64))
}

/// `CVaR + gamma * epsilon * ||x||_{q'}`: the worst-case CVaR over `R^n_+`.
pub fn worst_value_unrestricted(x: &Selection, dist: &EmpiricalDistribution, spec: &AmbiguitySpec, alpha: f64) -> Result<f64> {
    let risk = RiskSpec::new(alpha, dist.len())?;
    let cvar = cvar_discrete(dist, x, alpha)?;
    Ok(cvar + risk.gamma() * spec.epsilon * spec.norm.dual_norm_of_binary(x.cardinality()))
}

/// A distribution attaining [`worst_value_unrestricted`]: the costliest
/// realization moves by `N epsilon` along the direction dual to `x`.
pub fn worst_distribution_unrestricted(
    x: &Selection,
    dist: &EmpiricalDistribution,
    spec: &AmbiguitySpec,
    alpha: f64,
) -> Result<WorstCaseCertificate> {
    let costs = dist.costs(x)?;
    let risk = RiskSpec::new(alpha, dist.len())?;
    let budget = spec.budget(dist.len());
    if budget == 0.0 || x.is_zero() {
        return WorstCaseCertificate::unmoved(dist, x, alpha, risk.l);
    }
    let top = descending_order(&costs)[0];
    let mut realizations = dist.realizations().to_vec();
    let k = x.cardinality() as f64;
    let first = x.indices().next().expect("x is nonzero");
    for j in x.indices() {
        realizations[top][j] += match spec.norm {
            Norm::L1 if j == first => budget,
            Norm::L1 => 0.0,
            Norm::L2 => budget / k.sqrt(),
            Norm::LInf => budget,
        };
    }
    WorstCaseCertificate::assemble(dist, realizations, x, alpha, spec.norm, vec![top])
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u128::MAX / 1024 {
            return u128::MAX;
        }
    }
    acc
}

/// The worst distribution in the ball for `x` when `alpha = l/N` and the
/// support is a box or polytope.
pub fn worst_distribution(
    x: &Selection,
    dist: &EmpiricalDistribution,
    support: &SupportSet,
    spec: &AmbiguitySpec,
    risk: &RiskSpec,
) -> Result<WorstCaseCertificate> {
    check_dim(dist.dim(), x.len())?;
    check_dim(dist.len(), risk.n_samples)?;
    support.check_dim(dist.dim())?;
    if !support.is_bounded() {
        return Err(Error::invalid(
            "the subset adversary needs a bounded support; use the unrestricted closed form instead",
        ));
    }
    risk.require_exact()?;
    if !crate::model::validate_support_membership(dist, support)? {
        return Err(Error::invalid("every sample must lie in the support"));
    }
    let budget = spec.budget(dist.len());
    if budget == 0.0 || x.is_zero() {
        return WorstCaseCertificate::unmoved(dist, x, risk.alpha, risk.l);
    }
    match support {
        SupportSet::Box { upper, .. } if binomial(dist.len(), risk.l) <= ENUMERATION_LIMIT => {
            enumerate_subsets(x, dist, upper, budget, spec.norm, risk)
        }
        _ => AdversaryMip::new(x, dist, support, spec.norm, risk.l, budget).solve(risk.alpha),
    }
}

/// Any support: unrestricted goes to the closed form, the others to [`worst_distribution`].
pub fn worst_case(
    x: &Selection,
    dist: &EmpiricalDistribution,
    support: &SupportSet,
    spec: &AmbiguitySpec,
    alpha: f64,
) -> Result<WorstCaseCertificate> {
    match support {
        SupportSet::Unrestricted => worst_distribution_unrestricted(x, dist, spec, alpha),
        _ => worst_distribution(x, dist, support, spec, &RiskSpec::new(alpha, dist.len())?),
    }
}

fn enumerate_subsets(
    x: &Selection,
    dist: &EmpiricalDistribution,
    upper: &[f64],
    budget: f64,
    norm: Norm,
    risk: &RiskSpec,
) -> Result<WorstCaseCertificate> {
    let costs = dist.costs(x)?;
    let subsets: Vec<Vec<usize>> = (0..dist.len()).combinations(risk.l).collect();
    let values: Vec<f64> = subsets
        .par_iter()
        .map(|a| {
            let rooms = headrooms(x, dist, upper, a);
            let (gain, _) = lift_radii(&rooms, budget, norm);
            a.iter().map(|&i| costs[i]).sum::<f64>() + gain
        })
        .collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pick = values
        .iter()
        .position(|v| *v >= best - 1e-12 * (1.0 + best.abs()))
        .expect("at least one subset");
    let subset = &subsets[pick];
    let lift = inner_lift(x, subset, dist, upper, budget, norm)?;
    let mut realizations = dist.realizations().to_vec();
    for (&i, delta) in subset.iter().zip(&lift.deltas) {
        for (v, d) in realizations[i].iter_mut().zip(delta) {
            *v += d;
        }
    }
    WorstCaseCertificate::assemble(dist, realizations, x, risk.alpha, norm, subset.clone())
}

/// Mixed 0-1 model of the adversary: choose `l` realizations (`y`), move them
/// inside the support within the budget, maximise the average chosen cost.
struct AdversaryMip<'a> {
    x: &'a Selection,
    dist: &'a EmpiricalDistribution,
    norm: Norm,
    budget: f64,
    model: MixedModel,
    /// Per realization: (model variable, coordinate) of its movable coordinates.
    moves: Vec<Vec<(usize, usize)>>,
    /// Whether a move variable holds the new value (polytope) or the increase (box).
    absolute: bool,
    radius_var: Vec<usize>,
    y_var: Vec<usize>,
}

impl<'a> AdversaryMip<'a> {
    fn new(
        x: &'a Selection,
        dist: &'a EmpiricalDistribution,
        support: &SupportSet,
        norm: Norm,
        l: usize,
        budget: f64,
    ) -> Self {
        let (n, big_n) = (dist.dim(), dist.len());
        let selected: Vec<usize> = x.indices().collect();
        let (moves, absolute, polytope): (Vec<Vec<(usize, usize)>>, bool, Option<&Polytope>) = match support {
            SupportSet::Polytope(p) => {
                let moves = (0..big_n).map(|i| (0..n).map(|j| (i * n + j, j)).collect()).collect();
                (moves, true, Some(p))
            }
            _ => {
                let k = selected.len();
                let moves = (0..big_n)
                    .map(|i| selected.iter().enumerate().map(|(a, &j)| (i * k + a, j)).collect())
                    .collect();
                (moves, false, None)
            }
        };
        let move_count: usize = moves.iter().map(Vec::len).sum();
        // polytope 1-norm needs |xi - hat xi| split variables
        let abs_count = if absolute && norm == Norm::L1 { move_count } else { 0 };
        let radius0 = move_count + abs_count;
        let v0 = radius0 + big_n;
        let y0 = v0 + big_n;
        let total = y0 + big_n;
        let mut lp = LinearProgram::new(total);
        let upper_cost: f64 = match support {
            SupportSet::Box { upper, .. } => x.cost(upper),
            SupportSet::Polytope(p) => x.cost(p.coordinate_max()),
            SupportSet::Unrestricted => unreachable!("bounded supports only"),
        };
        let big_m = upper_cost.max(1e-9);

        for (i, row) in moves.iter().enumerate() {
            let xi = dist.realization(i);
            for &(var, j) in row {
                match support {
                    SupportSet::Box { upper, .. } => lp.set_bounds(var, 0.0, (upper[j] - xi[j]).max(0.0)),
                    SupportSet::Polytope(p) => lp.set_bounds(var, 0.0, p.coordinate_max()[j].max(xi[j])),
                    SupportSet::Unrestricted => unreachable!(),
                };
            }
            if let Some(p) = polytope {
                for h in p.rows() {
                    let mut coef = vec![0.0; total];
                    for &(var, j) in row {
                        coef[var] = h.normal[j];
                    }
                    lp.add_row(coef, Relation::Le, h.offset);
                }
            }
            // v_i <= cost of the moved realization
            let mut coef = vec![0.0; total];
            coef[v0 + i] = 1.0;
            let mut rhs = 0.0;
            for &(var, j) in row {
                if x.get(j) {
                    coef[var] = -1.0;
                }
            }
            if !absolute {
                rhs = x.cost(xi);
            }
            lp.add_row(coef, Relation::Le, rhs);
            // v_i <= M y_i
            let mut coef = vec![0.0; total];
            coef[v0 + i] = 1.0;
            coef[y0 + i] = -big_m;
            lp.add_row(coef, Relation::Le, 0.0);
            // radius_i >= norm of the displacement (relaxed for the 2-norm)
            let r = radius0 + i;
            match (norm, absolute) {
                (Norm::L1, false) => {
                    let mut coef = vec![0.0; total];
                    coef[r] = 1.0;
                    for &(var, _) in row {
                        coef[var] = -1.0;
                    }
                    lp.add_row(coef, Relation::Ge, 0.0);
                }
                (Norm::L1, true) => {
                    let mut coef = vec![0.0; total];
                    coef[r] = 1.0;
                    for (a, &(var, j)) in row.iter().enumerate() {
                        let abs_var = move_count + i * n + a;
                        coef[abs_var] = -1.0;
                        for sign in [1.0, -1.0] {
                            let mut c = vec![0.0; total];
                            c[abs_var] = 1.0;
                            c[var] = -sign;
                            lp.add_row(c, Relation::Ge, -sign * xi[j]);
                        }
                    }
                    lp.add_row(coef, Relation::Ge, 0.0);
                }
                (_, _) => {
                    for &(var, j) in row {
                        let base = if absolute { xi[j] } else { 0.0 };
                        for sign in [1.0, -1.0] {
                            if !absolute && sign < 0.0 {
                                continue;
                            }
                            let mut c = vec![0.0; total];
                            c[r] = 1.0;
                            c[var] = -sign;
                            lp.add_row(c, Relation::Ge, -sign * base);
                        }
                    }
                }
            }
        }
        let mut budget_row = vec![0.0; total];
        budget_row[radius0..radius0 + big_n].iter_mut().for_each(|c| *c = 1.0);
        lp.add_row(budget_row, Relation::Le, budget);
        let mut card = vec![0.0; total];
        card[y0..y0 + big_n].iter_mut().for_each(|c| *c = 1.0);
        lp.add_row(card, Relation::Eq, l as f64);
        for i in 0..big_n {
            lp.objective[v0 + i] = -1.0 / l as f64;
        }
        let model = MixedModel::new(lp, (y0..y0 + big_n).collect()).expect("adversary model is well formed");
        AdversaryMip {
            x,
            dist,
            norm,
            budget,
            model,
            moves,
            absolute,
            radius_var: (radius0..radius0 + big_n).collect(),
            y_var: (y0..y0 + big_n).collect(),
        }
    }

    /// Realizations encoded by a model solution; only chosen ones move.
    fn decode(&self, values: &[f64], scale: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut realizations = self.dist.realizations().to_vec();
        let mut chosen = Vec::new();
        for (i, row) in self.moves.iter().enumerate() {
            if values[self.y_var[i]] < 0.5 {
                continue;
            }
            chosen.push(i);
            let base = self.dist.realization(i);
            for &(var, j) in row {
                let d = if self.absolute {
                    values[var] - base[j]
                } else {
                    values[var].max(0.0)
                };
                realizations[i][j] = (base[j] + scale * d).max(0.0);
            }
        }
        (realizations, chosen)
    }

    fn displacement(&self, values: &[f64], i: usize) -> Vec<(usize, f64)> {
        let base = self.dist.realization(i);
        self.moves[i]
            .iter()
            .map(|&(var, j)| {
                let d = if self.absolute { values[var] - base[j] } else { values[var] };
                (var, d)
            })
            .collect()
    }

    fn solve(mut self, alpha: f64) -> Result<WorstCaseCertificate> {
        if self.norm != Norm::L2 {
            let report = milp::solve_mixed(&self.model, 0.0)?.into_solution()?;
            let (realizations, chosen) = self.decode(&report.values, 1.0);
            return WorstCaseCertificate::assemble(self.dist, realizations, self.x, alpha, self.norm, chosen);
        }
        // Kelley: tangent cuts on ||d_i||_2 <= radius_i
        let mut best: Option<WorstCaseCertificate> = None;
        let mut hint = None;
        for _ in 0..KELLEY_MAX_ROUNDS {
            let report = milp::BranchAndBound::new(0.0).hint(hint.take()).solve(&self.model)?.into_solution()?;
            let relaxed_value = -report.objective;
            let norms: Vec<f64> = (0..self.dist.len())
                .map(|i| {
                    let d: Vec<f64> = self.displacement(&report.values, i).into_iter().map(|(_, v)| v).collect();
                    Norm::L2.eval(&d)
                })
                .collect();
            let chosen_total: f64 = (0..self.dist.len())
                .filter(|&i| report.values[self.y_var[i]] >= 0.5)
                .map(|i| norms[i])
                .sum();
            let scale = if chosen_total > self.budget { self.budget / chosen_total } else { 1.0 };
            let (realizations, chosen) = self.decode(&report.values, scale);
            let cert = WorstCaseCertificate::assemble(self.dist, realizations, self.x, alpha, Norm::L2, chosen)?;
            if best.as_ref().is_none_or(|b| cert.value > b.value) {
                best = Some(cert);
            }
            let lower = best.as_ref().map(|b| b.value).unwrap_or(0.0);
            if relaxed_value - lower <= KELLEY_REL_TOL * (1.0 + lower.abs()) {
                break;
            }
            let mut added = false;
            for i in 0..self.dist.len() {
                let disp = self.displacement(&report.values, i);
                let radius = report.values[self.radius_var[i]];
                if norms[i] <= radius * (1.0 + 1e-9) + 1e-12 {
                    continue;
                }
                let total = self.model.lp.num_vars();
                let mut coef = vec![0.0; total];
                coef[self.radius_var[i]] = 1.0;
                let base = self.dist.realization(i);
                let mut rhs = 0.0;
                for (a, &(var, _)) in disp.iter().enumerate() {
                    let u = disp[a].1 / norms[i];
                    coef[var] = -u;
                    if self.absolute {
                        rhs -= u * base[self.moves[i][a].1];
                    }
                }
                self.model.lp.rows.push(Row::new(coef, Relation::Ge, rhs));
                added = true;
            }
            if !added {
                break;
            }
            hint = Some(self.y_var.iter().map(|&v| report.values[v] >= 0.5).collect());
        }
        best.ok_or_else(|| Error::Solver("adversary produced no distribution".into()))
    }
}
