//! Brute-force oracles and random instance builders shared by the integration tests.
#![allow(dead_code)]

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use wdro::milp::{solve_lp, LinearProgram, Relation, Status};
use wdro::model::{EmpiricalDistribution, FeasibleSet, HalfSpace, Norm, Selection, SupportSet};
use wdro::problems::{KnapsackInstance, RepSelectionInstance};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Feasibility rules restated independently of the library encodings; the
/// knapsack is the covering form `w · x >= W`.
#[derive(Clone, Debug)]
pub enum Rule {
    Knapsack { weights: Vec<f64>, capacity: f64 },
    Groups(Vec<Vec<usize>>),
}

impl Rule {
    pub fn admits(&self, x: &Selection) -> bool {
        match self {
            Rule::Knapsack { weights, capacity } => x.indices().map(|j| weights[j]).sum::<f64>() >= capacity - 1e-9,
            Rule::Groups(groups) => groups.iter().all(|g| g.iter().filter(|&&j| x.get(j)).count() == 1),
        }
    }
}

pub struct Problem {
    pub set: FeasibleSet,
    pub rule: Rule,
    pub n: usize,
}

impl Problem {
    /// Every feasible point, by scanning all `2^n` vectors.
    pub fn points(&self) -> Vec<Selection> {
        (0u32..1 << self.n)
            .map(|m| Selection::new((0..self.n).map(|j| m >> j & 1 == 1).collect()))
            .filter(|x| self.rule.admits(x))
            .collect()
    }
}

pub fn random_knapsack(r: &mut ChaCha8Rng, n: usize) -> Problem {
    let weights: Vec<f64> = (0..n).map(|_| r.random_range(0.1..1.0)).collect();
    let capacity = r.random_range(0.2..0.7) * weights.iter().sum::<f64>();
    let set = KnapsackInstance::new(weights.clone(), capacity).unwrap().encode().unwrap();
    Problem {
        set,
        rule: Rule::Knapsack { weights, capacity },
        n,
    }
}

/// Random partition of `0..n` into `k` nonempty groups.
pub fn random_groups(r: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<usize>> {
    assert!(k >= 1 && k <= n);
    let mut groups: Vec<Vec<usize>> = (0..k).map(|g| vec![g]).collect();
    for j in k..n {
        let g = r.random_range(0..k);
        groups[g].push(j);
    }
    groups
}

pub fn random_rs(r: &mut ChaCha8Rng, n: usize) -> Problem {
    let k = r.random_range(1..=n.min(4));
    let groups = random_groups(r, n, k);
    let set = RepSelectionInstance::new(groups.clone()).unwrap().encode().unwrap();
    Problem {
        set,
        rule: Rule::Groups(groups),
        n,
    }
}

pub fn random_problem(r: &mut ChaCha8Rng, n: usize) -> Problem {
    if r.random_bool(0.5) {
        random_knapsack(r, n)
    } else {
        random_rs(r, n)
    }
}

pub fn random_dist(r: &mut ChaCha8Rng, n: usize, n_samples: usize) -> EmpiricalDistribution {
    EmpiricalDistribution::new(
        (0..n_samples)
            .map(|_| (0..n).map(|_| r.random_range(0.0..3.0)).collect())
            .collect(),
    )
    .unwrap()
}

/// A box around the sample: `[0, max_i xi_ij + U(0, 2)]`.
pub fn box_around(r: &mut ChaCha8Rng, dist: &EmpiricalDistribution) -> (Vec<f64>, Vec<f64>) {
    let n = dist.dim();
    let upper = (0..n)
        .map(|j| {
            let m = dist.realizations().iter().map(|row| row[j]).fold(0.0, f64::max);
            m + r.random_range(0.0..2.0)
        })
        .collect();
    (vec![0.0; n], upper)
}

pub fn random_selection(r: &mut ChaCha8Rng, n: usize) -> Selection {
    Selection::new((0..n).map(|_| r.random_bool(0.5)).collect())
}

/// Rockafellar-Uryasev form: `min_t t + sum (c_i - t)_+ / (alpha N)`, minimised over
/// the breakpoints `t in costs`.
pub fn cvar_ru(costs: &[f64], alpha: f64) -> f64 {
    let scale = 1.0 / (alpha * costs.len() as f64);
    costs
        .iter()
        .map(|&t| t + scale * costs.iter().map(|&c| (c - t).max(0.0)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

pub fn costs(dist: &EmpiricalDistribution, x: &Selection) -> Vec<f64> {
    dist.realizations().iter().map(|row| x.indices().map(|j| row[j]).sum()).collect()
}

pub fn cvar(dist: &EmpiricalDistribution, x: &Selection, alpha: f64) -> f64 {
    cvar_ru(&costs(dist, x), alpha)
}

/// `||x||_{q'}` for binary `x`, written out per norm.
pub fn dual_norm(norm: Norm, x: &Selection) -> f64 {
    let k = x.cardinality() as f64;
    match norm {
        Norm::L1 => {
            if k > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        Norm::L2 => k.sqrt(),
        Norm::LInf => k,
    }
}

/// Worst-case CVaR over `R^n_+` from the duality formula.
pub fn worst_unrestricted(dist: &EmpiricalDistribution, x: &Selection, alpha: f64, eps: f64, norm: Norm) -> f64 {
    let gamma = (dist.len() as f64).min(1.0 / alpha);
    cvar(dist, x, alpha) + gamma * eps * dual_norm(norm, x)
}

/// Worst-case CVaR with `alpha = l/N` over a bounded support, `q in {1, inf}`.
///
/// The worst distribution moves at most the `l` realizations that end up in the
/// tail, so the value is the maximum over `l`-subsets `A` of an LP that spends
/// the budget `N eps` on the members of `A`.
pub fn worst_bounded(
    x: &Selection,
    dist: &EmpiricalDistribution,
    support: &SupportSet,
    eps: f64,
    norm: Norm,
    l: usize,
) -> f64 {
    assert!(norm != Norm::L2, "the LP oracle covers q = 1 and q = inf");
    let big_n = dist.len();
    let budget = eps * big_n as f64;
    let c = costs(dist, x);
    (0..big_n)
        .combinations(l)
        .map(|a| {
            let base: f64 = a.iter().map(|&i| c[i]).sum();
            (base + subset_gain(x, dist, support, budget, norm, &a)) / l as f64
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn subset_gain(
    x: &Selection,
    dist: &EmpiricalDistribution,
    support: &SupportSet,
    budget: f64,
    norm: Norm,
    subset: &[usize],
) -> f64 {
    if budget == 0.0 || x.is_zero() {
        return 0.0;
    }
    match support {
        SupportSet::Box { upper, .. } => box_gain(x, dist, upper, budget, norm, subset),
        SupportSet::Polytope(_) => polytope_gain(x, dist, support, budget, norm, subset),
        SupportSet::Unrestricted => panic!("bounded supports only"),
    }
}

/// In a box only raising coordinates in `supp(x)` pays, so the LP keeps one
/// increment `delta_{a,j} in [0, u_j - xi_{a,j}]` per tail member and item.
fn box_gain(x: &Selection, dist: &EmpiricalDistribution, upper: &[f64], budget: f64, norm: Norm, subset: &[usize]) -> f64 {
    let items: Vec<usize> = x.indices().collect();
    let k = items.len();
    let l = subset.len();
    let vars = k * l + l;
    let mut lp = LinearProgram::new(vars);
    for (a, &i) in subset.iter().enumerate() {
        let hat = dist.realization(i);
        for (p, &j) in items.iter().enumerate() {
            let v = a * k + p;
            lp.objective[v] = -1.0;
            lp.set_bounds(v, 0.0, upper[j] - hat[j]);
        }
        let radius = k * l + a;
        if norm == Norm::LInf {
            for p in 0..k {
                let mut row = vec![0.0; vars];
                row[a * k + p] = 1.0;
                row[radius] = -1.0;
                lp.add_row(row, Relation::Le, 0.0);
            }
        } else {
            let mut row = vec![0.0; vars];
            row[a * k..(a + 1) * k].iter_mut().for_each(|c| *c = 1.0);
            row[radius] = -1.0;
            lp.add_row(row, Relation::Le, 0.0);
        }
    }
    let mut total = vec![0.0; vars];
    total[k * l..].iter_mut().for_each(|c| *c = 1.0);
    lp.add_row(total, Relation::Le, budget);
    let report = solve_lp(&lp).unwrap();
    assert_eq!(report.status, Status::Optimal, "oracle LP failed");
    -report.objective
}

/// Full LP over the moved points with `|xi' - xi|` split into `d`.
fn polytope_gain(
    x: &Selection,
    dist: &EmpiricalDistribution,
    support: &SupportSet,
    budget: f64,
    norm: Norm,
    subset: &[usize],
) -> f64 {
    let SupportSet::Polytope(poly) = support else { unreachable!() };
    let n = dist.dim();
    let l = subset.len();
    // xi'_{a,j} at a*n + j, d_{a,j} at l*n + a*n + j, t_a at 2*l*n + a
    let xi = |a: usize, j: usize| a * n + j;
    let d = |a: usize, j: usize| l * n + a * n + j;
    let t = |a: usize| 2 * l * n + a;
    let vars = 2 * l * n + l;
    let mut lp = LinearProgram::new(vars);
    for (a, &i) in subset.iter().enumerate() {
        let hat = dist.realization(i);
        for j in 0..n {
            if x.get(j) {
                lp.objective[xi(a, j)] = -1.0;
            }
            let mut up = vec![0.0; vars];
            up[xi(a, j)] = 1.0;
            up[d(a, j)] = -1.0;
            lp.add_row(up, Relation::Le, hat[j]);
            let mut down = vec![0.0; vars];
            down[xi(a, j)] = -1.0;
            down[d(a, j)] = -1.0;
            lp.add_row(down, Relation::Le, -hat[j]);
            if norm == Norm::LInf {
                let mut link = vec![0.0; vars];
                link[d(a, j)] = 1.0;
                link[t(a)] = -1.0;
                lp.add_row(link, Relation::Le, 0.0);
            }
        }
        if norm == Norm::L1 {
            let mut sum = vec![0.0; vars];
            for j in 0..n {
                sum[d(a, j)] = 1.0;
            }
            sum[t(a)] = -1.0;
            lp.add_row(sum, Relation::Le, 0.0);
        }
        for h in poly.rows() {
            let mut row = vec![0.0; vars];
            for j in 0..n {
                row[xi(a, j)] = h.normal[j];
            }
            lp.add_row(row, Relation::Le, h.offset);
        }
    }
    let mut total = vec![0.0; vars];
    for a in 0..l {
        total[t(a)] = 1.0;
    }
    lp.add_row(total, Relation::Le, budget);
    let report = solve_lp(&lp).unwrap();
    assert_eq!(report.status, Status::Optimal, "oracle LP failed");
    let base: f64 = subset.iter().map(|&i| x.cost(dist.realization(i))).sum();
    -report.objective - base
}

/// `min f` over the points, first minimiser on ties.
pub fn brute_min<F>(points: &[Selection], f: F) -> (Selection, f64)
where
    F: Fn(&Selection) -> f64 + Sync,
{
    let values: Vec<f64> = points.par_iter().map(&f).collect();
    let (k, v) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bk, bv), (k, &v)| if v < bv { (k, v) } else { (bk, bv) });
    (points[k].clone(), v)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// A simplex-like polytope `{xi >= 0, sum xi <= s, xi_j <= u_j}` containing the sample.
pub fn polytope_around(r: &mut ChaCha8Rng, dist: &EmpiricalDistribution) -> SupportSet {
    let n = dist.dim();
    let (_, upper) = box_around(r, dist);
    let max_sum = dist.realizations().iter().map(|row| row.iter().sum::<f64>()).fold(0.0, f64::max);
    let mut rows: Vec<HalfSpace> = (0..n)
        .map(|j| {
            let mut normal = vec![0.0; n];
            normal[j] = 1.0;
            HalfSpace {
                normal,
                offset: upper[j],
            }
        })
        .collect();
    rows.push(HalfSpace {
        normal: vec![1.0; n],
        offset: max_sum + r.random_range(0.0..1.5),
    });
    SupportSet::polytope(n, rows).unwrap()
}
