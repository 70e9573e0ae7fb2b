//! Concrete problem families, their linear encodings and deterministic solvers.

use petgraph::algo::{has_path_connecting, toposort};
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::milp::{Relation, Row};
use crate::model::{risk_bracket, EmpiricalDistribution, FeasibleSet, ProblemTag, Selection};

/// `{x : w · x >= W}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnapsackInstance {
    pub weights: Vec<f64>,
    pub capacity: f64,
}

impl KnapsackInstance {
    pub fn new(weights: Vec<f64>, capacity: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("knapsack needs at least one item"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || !capacity.is_finite() || capacity < 0.0 {
            return Err(Error::invalid("knapsack weights and capacity must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if total < capacity {
            return Err(Error::invalid(format!(
                "knapsack is infeasible: total weight {total} is below the capacity {capacity}"
            )));
        }
        Ok(KnapsackInstance { weights, capacity })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn encode(&self) -> Result<FeasibleSet> {
        let row = Row::new(self.weights.clone(), Relation::Ge, self.capacity);
        FeasibleSet::new(self.n(), vec![row], ProblemTag::Knapsack(self.clone()))
    }

    pub fn contains(&self, x: &Selection) -> bool {
        x.len() == self.n() && x.cost(&self.weights) >= self.capacity - 1e-9 * (1.0 + self.capacity)
    }
}

/// Pick exactly one tool from every group of a partition of `0..n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepSelectionInstance {
    groups: Vec<Vec<usize>>,
    #[serde(skip)]
    group_of: Vec<usize>,
}

impl RepSelectionInstance {
    pub fn new(groups: Vec<Vec<usize>>) -> Result<Self> {
        let n: usize = groups.iter().map(Vec::len).sum();
        if groups.is_empty() || groups.iter().any(Vec::is_empty) {
            return Err(Error::invalid("representatives selection needs nonempty groups"));
        }
        let mut group_of = vec![usize::MAX; n];
        for (g, members) in groups.iter().enumerate() {
            for &j in members {
                if j >= n || group_of[j] != usize::MAX {
                    return Err(Error::invalid("groups must partition 0..n"));
                }
                group_of[j] = g;
            }
        }
        Ok(RepSelectionInstance { groups, group_of })
    }

    /// Consecutive groups of the given sizes.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        let mut next = 0;
        let groups = sizes
            .iter()
            .map(|&s| {
                let g: Vec<usize> = (next..next + s).collect();
                next += s;
                g
            })
            .collect();
        Self::new(groups)
    }

    pub fn n(&self) -> usize {
        self.group_of.len()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group_of(&self, tool: usize) -> usize {
        self.group_of[tool]
    }

    pub fn encode(&self) -> Result<FeasibleSet> {
        let n = self.n();
        let rows = self
            .groups
            .iter()
            .map(|g| {
                let mut coef = vec![0.0; n];
                for &j in g {
                    coef[j] = 1.0;
                }
                Row::new(coef, Relation::Eq, 1.0)
            })
            .collect();
        FeasibleSet::new(n, rows, ProblemTag::RepSelection(self.clone()))
    }

    pub fn contains(&self, x: &Selection) -> bool {
        x.len() == self.n() && self.groups.iter().all(|g| g.iter().filter(|&&j| x.get(j)).count() == 1)
    }

    /// Cheapest tool of every group; ties go to the smallest index.
    pub fn solve_det(&self, costs: &[f64]) -> Result<(Selection, f64)> {
        check_dim(self.n(), costs.len())?;
        let mut chosen = Vec::with_capacity(self.groups.len());
        for g in &self.groups {
            let best = g
                .iter()
                .copied()
                .min_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)))
                .expect("groups are nonempty");
            chosen.push(best);
        }
        let x = Selection::from_indices(self.n(), &chosen);
        let value = x.cost(costs);
        Ok((x, value))
    }
}

/// Directed acyclic graph with one binary variable per arc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DagShortestPathInstance {
    pub vertices: usize,
    pub arcs: Vec<(usize, usize)>,
    pub source: usize,
    pub sink: usize,
}

impl DagShortestPathInstance {
    pub fn new(vertices: usize, arcs: Vec<(usize, usize)>, source: usize, sink: usize) -> Result<Self> {
        let inst = DagShortestPathInstance {
            vertices,
            arcs,
            source,
            sink,
        };
        if inst.arcs.is_empty() {
            return Err(Error::invalid("shortest path instance needs at least one arc"));
        }
        if source >= vertices || sink >= vertices || source == sink {
            return Err(Error::invalid("source and sink must be distinct vertices"));
        }
        if inst.arcs.iter().any(|&(u, v)| u >= vertices || v >= vertices) {
            return Err(Error::invalid("arc endpoint out of range"));
        }
        let g = inst.graph();
        if toposort(&g, None).is_err() {
            return Err(Error::invalid("graph has a directed cycle"));
        }
        if !has_path_connecting(&g, NodeIndex::new(source), NodeIndex::new(sink), None) {
            return Err(Error::invalid("sink is not reachable from source"));
        }
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.arcs.len()
    }

    fn graph(&self) -> DiGraph<(), usize> {
        let mut g = DiGraph::with_capacity(self.vertices, self.arcs.len());
        for _ in 0..self.vertices {
            g.add_node(());
        }
        for (k, &(u, v)) in self.arcs.iter().enumerate() {
            g.add_edge(NodeIndex::new(u), NodeIndex::new(v), k);
        }
        g
    }

    /// Flow balance: out - in = 1 at s, -1 at t, 0 elsewhere.
    pub fn encode(&self) -> Result<FeasibleSet> {
        let n = self.n();
        let rows = (0..self.vertices)
            .map(|v| {
                let mut coef = vec![0.0; n];
                for (k, &(a, b)) in self.arcs.iter().enumerate() {
                    if a == v {
                        coef[k] += 1.0;
                    }
                    if b == v {
                        coef[k] -= 1.0;
                    }
                }
                let rhs = if v == self.source {
                    1.0
                } else if v == self.sink {
                    -1.0
                } else {
                    0.0
                };
                Row::new(coef, Relation::Eq, rhs)
            })
            .collect();
        FeasibleSet::new(n, rows, ProblemTag::DagShortestPath(self.clone()))
    }

    /// True iff the selected arcs form one simple s-t path.
    pub fn contains(&self, x: &Selection) -> bool {
        if x.len() != self.n() {
            return false;
        }
        let mut at = self.source;
        let mut used = 0;
        while at != self.sink {
            let mut out = x.indices().filter(|&k| self.arcs[k].0 == at);
            match (out.next(), out.next()) {
                (Some(k), None) => {
                    at = self.arcs[k].1;
                    used += 1;
                }
                _ => return false,
            }
            if used > self.n() {
                return false;
            }
        }
        used == x.cardinality()
    }

    /// Shortest path by relaxation in topological order.
    pub fn solve_det(&self, costs: &[f64]) -> Result<(Selection, f64)> {
        check_dim(self.n(), costs.len())?;
        let g = self.graph();
        let order = toposort(&g, None).map_err(|_| Error::invalid("graph has a directed cycle"))?;
        let mut dist = vec![f64::INFINITY; self.vertices];
        let mut pred: Vec<Option<usize>> = vec![None; self.vertices];
        dist[self.source] = 0.0;
        let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); self.vertices];
        for (k, &(u, _)) in self.arcs.iter().enumerate() {
            out_arcs[u].push(k);
        }
        for node in order {
            let u = node.index();
            if !dist[u].is_finite() {
                continue;
            }
            for &k in &out_arcs[u] {
                let v = self.arcs[k].1;
                let cand = dist[u] + costs[k];
                if cand < dist[v] {
                    dist[v] = cand;
                    pred[v] = Some(k);
                }
            }
        }
        let mut path = Vec::new();
        let mut at = self.sink;
        while at != self.source {
            let k = pred[at].ok_or(Error::Infeasible)?;
            path.push(k);
            at = self.arcs[k].0;
        }
        let x = Selection::from_indices(self.n(), &path);
        let value = x.cost(costs);
        Ok((x, value))
    }
}

/// Minimise `costs · x` over a feasible set, using the specialised solver of
/// its tag when there is one.
pub fn solve_det(set: &FeasibleSet, costs: &[f64], gap_tol: f64) -> Result<(Selection, f64)> {
    check_dim(set.n(), costs.len())?;
    match set.tag() {
        ProblemTag::RepSelection(rs) => rs.solve_det(costs),
        ProblemTag::DagShortestPath(sp) if costs.iter().all(|c| *c >= 0.0) => sp.solve_det(costs),
        _ => set.minimize_linear(costs, gap_tol),
    }
}

/// Layered graph with vertices `0..=l`: tool `j` becomes arc `g(j) -> g(j)+1`.
pub fn rs_to_shortest_path(rs: &RepSelectionInstance) -> DagShortestPathInstance {
    let arcs = (0..rs.n())
        .map(|j| (rs.group_of(j), rs.group_of(j) + 1))
        .collect();
    DagShortestPathInstance::new(rs.num_groups() + 1, arcs, 0, rs.num_groups())
        .expect("layered graph from a valid partition is a DAG")
}

/// Output of the min-max to CVaR reduction for representatives selection.
#[derive(Clone, Debug)]
pub struct HardnessReduction {
    /// The original groups plus a final singleton group holding the new tool `n`.
    pub instance: RepSelectionInstance,
    pub distribution: EmpiricalDistribution,
    pub alpha: f64,
    pub big_m: f64,
    pub l: usize,
    pub n_samples: usize,
}

impl HardnessReduction {
    /// CVaR optimum of the reduced instance as a function of the min-max optimum.
    pub fn value_map(&self, minmax_value: f64) -> f64 {
        let an = self.alpha * self.n_samples as f64;
        let lm1 = (self.l - 1) as f64;
        lm1 * self.big_m / an + (1.0 - lm1 / an) * minmax_value
    }

    /// Restrict a solution of the reduced instance to the original tools.
    pub fn project(&self, x: &Selection) -> Selection {
        Selection::new(x.bits()[..x.len() - 1].to_vec())
    }
}

/// Build a CVaR instance whose optimum encodes the min-max optimum over `scenarios`.
pub fn reduce_minmax_rs_to_cvar_rs(
    rs: &RepSelectionInstance,
    scenarios: &[Vec<f64>],
    alpha: f64,
) -> Result<HardnessReduction> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("the reduction needs alpha strictly inside (0, 1)"));
    }
    if scenarios.is_empty() {
        return Err(Error::invalid("the reduction needs at least one scenario"));
    }
    let n = rs.n();
    for s in scenarios {
        check_dim(n, s.len())?;
    }
    let k = scenarios.len();
    let l = ((k as f64 * alpha / (1.0 - alpha)) - 1e-9).ceil().max(1.0) as usize;
    let n_samples = k + l - 1;
    let big_m: f64 = scenarios.iter().flat_map(|s| s.iter().map(|v| v.abs())).sum();

    let mut samples: Vec<Vec<f64>> = scenarios
        .iter()
        .map(|s| {
            let mut v = s.clone();
            v.push(0.0);
            v
        })
        .collect();
    let mut zeta = vec![0.0; n + 1];
    zeta[n] = big_m;
    samples.extend(std::iter::repeat_n(zeta, l - 1));

    let mut groups = rs.groups().to_vec();
    groups.push(vec![n]);
    let instance = RepSelectionInstance::new(groups)?;
    let distribution = EmpiricalDistribution::new(samples)?;

    let (bracket_l, _) = risk_bracket(alpha, n_samples)?;
    if bracket_l != l {
        return Err(Error::Solver(format!(
            "reduction bracket mismatch: constructed l = {l}, bracket gives {bracket_l}"
        )));
    }
    Ok(HardnessReduction {
        instance,
        distribution,
        alpha,
        big_m,
        l,
        n_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rs_singletons_force_everything() {
        let rs = RepSelectionInstance::new(vec![vec![0], vec![1]]).unwrap();
        let set = rs.encode().unwrap();
        assert_eq!(set.constraints().len(), 2);
        assert_eq!(set.enumerate(), vec![Selection::new(vec![true, true])]);
    }

    #[test]
    fn rs_det_example() {
        let rs = RepSelectionInstance::new(vec![vec![0, 1], vec![2]]).unwrap();
        let (x, v) = rs.solve_det(&[3.0, 1.0, 5.0]).unwrap();
        assert_eq!(x, Selection::new(vec![false, true, true]));
        assert_eq!(v, 6.0);
    }

    #[test]
    fn two_parallel_arcs() {
        let sp = DagShortestPathInstance::new(2, vec![(0, 1), (0, 1)], 0, 1).unwrap();
        let sols = sp.encode().unwrap().enumerate();
        assert_eq!(sols.len(), 2);
        assert!(sols.iter().all(|x| x.cardinality() == 1));
        assert_eq!(sp.solve_det(&[2.0, 1.0]).unwrap().1, 1.0);
    }

    #[test]
    fn layered_graph_shapes() {
        let one = rs_to_shortest_path(&RepSelectionInstance::from_sizes(&[3]).unwrap());
        assert_eq!(one.arcs, vec![(0, 1); 3]);
        let two = RepSelectionInstance::from_sizes(&[2, 3]).unwrap();
        let sp = rs_to_shortest_path(&two);
        assert_eq!(sp.encode().unwrap().enumerate().len(), 6);
    }

    #[test]
    fn invalid_instances_rejected() {
        assert!(RepSelectionInstance::new(vec![vec![0], vec![0]]).is_err());
        assert!(RepSelectionInstance::new(vec![vec![0], vec![2]]).is_err());
        assert!(DagShortestPathInstance::new(2, vec![(0, 1), (1, 0)], 0, 1).is_err());
        assert!(DagShortestPathInstance::new(3, vec![(0, 1)], 0, 2).is_err());
        assert!(KnapsackInstance::new(vec![1.0, 1.0], 3.0).is_err());
    }

    #[test]
    fn reduction_small_case() {
        let rs = RepSelectionInstance::from_sizes(&[2]).unwrap();
        let red = reduce_minmax_rs_to_cvar_rs(&rs, &[vec![1.0, 2.0], vec![3.0, 0.5]], 0.5).unwrap();
        assert_eq!((red.l, red.n_samples), (2, 3));
        assert_eq!(red.distribution.len(), 3);
        assert_eq!(red.big_m, 6.5);
        assert_eq!(red.distribution.realization(2), &[0.0, 0.0, 6.5]);
        assert_eq!(red.instance.groups().last().unwrap(), &vec![2]);
    }

    fn sizes() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(1usize..4, 1..4)
    }

    proptest! {
        #[test]
        fn rs_encoding_matches_combinatorics(sizes in sizes()) {
            let rs = RepSelectionInstance::from_sizes(&sizes).unwrap();
            let encoded = rs.encode().unwrap().enumerate();
            let direct: Vec<Selection> = Selection::enumerate_all(rs.n()).filter(|x| rs.contains(x)).collect();
            prop_assert_eq!(encoded.len(), sizes.iter().product::<usize>());
            prop_assert_eq!(encoded, direct);
        }

        #[test]
        fn layered_paths_biject_with_selections(
            sizes in sizes(),
            costs in prop::collection::vec(0.0f64..10.0, 12),
        ) {
            let rs = RepSelectionInstance::from_sizes(&sizes).unwrap();
            let costs = &costs[..rs.n()];
            let sp = rs_to_shortest_path(&rs);
            let paths = sp.encode().unwrap().enumerate();
            let sels: Vec<Selection> = Selection::enumerate_all(rs.n()).filter(|x| rs.contains(x)).collect();
            prop_assert_eq!(&paths, &sels);
            prop_assert!(paths.iter().all(|x| sp.contains(x)));
            let (_, a) = rs.solve_det(costs).unwrap();
            let (_, b) = sp.solve_det(costs).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn knapsack_det_matches_enumeration(
            w in prop::collection::vec(0.0f64..1.0, 2..9),
            c in prop::collection::vec(0.0f64..5.0, 9),
            frac in 0.0f64..0.9,
        ) {
            let total: f64 = w.iter().sum();
            let ks = KnapsackInstance::new(w.clone(), frac * total).unwrap();
            let set = ks.encode().unwrap();
            let costs = &c[..ks.n()];
            let (x, v) = solve_det(&set, costs, 0.0).unwrap();
            prop_assert!(ks.contains(&x));
            let best = Selection::enumerate_all(ks.n())
                .filter(|y| ks.contains(y))
                .map(|y| y.cost(costs))
                .fold(f64::INFINITY, f64::min);
            prop_assert!((v - best).abs() <= 1e-9 * (1.0 + best));
        }
    }
}
