//! Problem instances, solutions and witness verification.

use hubway_core::graph::MetricInstance;
use hubway_core::tol;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemKind {
    Tsp,
    Steiner,
    Facility,
}

/// One optimization instance over a shortest-path metric.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub kind: ProblemKind,
    pub metric: MetricInstance,
    /// steiner terminals (sorted)
    pub terminals: Vec<usize>,
    /// facility opening cost per vertex
    pub open_cost: Vec<f64>,
    /// facility connection weight per vertex (defaults to 1)
    pub phi: Vec<f64>,
}

impl ProblemInstance {
    pub fn tsp(metric: MetricInstance) -> Self {
        let n = metric.n();
        ProblemInstance {
            kind: ProblemKind::Tsp,
            metric,
            terminals: Vec::new(),
            open_cost: vec![0.0; n],
            phi: vec![1.0; n],
        }
    }

    pub fn steiner(metric: MetricInstance, mut terminals: Vec<usize>) -> Self {
        terminals.sort_unstable();
        terminals.dedup();
        let n = metric.n();
        assert!(terminals.iter().all(|&t| t < n), "terminals out of range");
        ProblemInstance {
            kind: ProblemKind::Steiner,
            metric,
            terminals,
            open_cost: vec![0.0; n],
            phi: vec![1.0; n],
        }
    }

    pub fn facility(metric: MetricInstance, open_cost: Vec<f64>, phi: Option<Vec<f64>>) -> Self {
        let n = metric.n();
        assert_eq!(open_cost.len(), n);
        let phi = phi.unwrap_or_else(|| vec![1.0; n]);
        assert_eq!(phi.len(), n);
        ProblemInstance {
            kind: ProblemKind::Facility,
            metric,
            terminals: Vec::new(),
            open_cost,
            phi,
        }
    }
}

/// Solution witness per problem kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Witness {
    /// closed walk as a vertex sequence (implicitly returning to the start)
    Tour(Vec<usize>),
    /// tree edges as metric pairs
    Tree(Vec<(usize, usize)>),
    /// opened facilities
    Facility(Vec<usize>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub cost: f64,
    pub witness: Option<Witness>,
    pub method: String,
    pub feasible: bool,
}

impl SolveResult {
    pub fn infeasible(method: &str) -> Self {
        SolveResult {
            cost: f64::INFINITY,
            witness: None,
            method: method.to_string(),
            feasible: false,
        }
    }
}

/// Recomputes a witness's cost against the instance metric; `None` when the
/// witness is infeasible.
pub fn verify_witness(p: &ProblemInstance, w: &Witness) -> Option<f64> {
    let m = &p.metric;
    let n = m.n();
    match (p.kind, w) {
        (ProblemKind::Tsp, Witness::Tour(seq)) => {
            if seq.is_empty() {
                return if n == 0 { Some(0.0) } else { None };
            }
            let mut seen = vec![false; n];
            for &v in seq {
                if v >= n {
                    return None;
                }
                seen[v] = true;
            }
            if !seen.iter().all(|&s| s) {
                return None;
            }
            let mut cost = 0.0;
            for w in seq.windows(2) {
                cost += m.dist(w[0], w[1]);
            }
            cost += m.dist(*seq.last().unwrap(), seq[0]);
            Some(cost)
        }
        (ProblemKind::Steiner, Witness::Tree(edges)) => {
            if p.terminals.len() <= 1 {
                return if edges.is_empty() { Some(0.0) } else { None };
            }
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(parent: &mut Vec<usize>, x: usize) -> usize {
                if parent[x] != x {
                    let root = find(parent, parent[x]);
                    parent[x] = root;
                }
                parent[x]
            }
            let mut cost = 0.0;
            for &(u, v) in edges {
                if u >= n || v >= n {
                    return None;
                }
                cost += m.dist(u, v);
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                parent[ru] = rv;
            }
            let root = find(&mut parent, p.terminals[0]);
            if p.terminals.iter().all(|&t| find(&mut parent, t) == root) {
                Some(cost)
            } else {
                None
            }
        }
        (ProblemKind::Facility, Witness::Facility(open)) => {
            if open.is_empty() || open.iter().any(|&v| v >= n) {
                return None;
            }
            let mut cost: f64 = open.iter().map(|&v| p.open_cost[v]).sum();
            for v in 0..n {
                let d = open
                    .iter()
                    .map(|&w| m.dist(v, w))
                    .fold(f64::INFINITY, f64::min);
                cost += p.phi[v] * d;
            }
            Some(cost)
        }
        _ => None,
    }
}

/// True when the recomputed witness cost matches the reported cost.
pub fn result_is_consistent(p: &ProblemInstance, r: &SolveResult) -> bool {
    match (&r.witness, r.feasible) {
        (Some(w), true) => {
            verify_witness(p, w).is_some_and(|c| tol::approx_eq(c, r.cost))
        }
        (None, false) => true,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hubway_core::graph::{build_metric, WeightedGraph};

    fn path3() -> MetricInstance {
        build_metric(WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap()).unwrap()
    }

    #[test]
    fn tour_verification() {
        let p = ProblemInstance::tsp(path3());
        assert_eq!(verify_witness(&p, &Witness::Tour(vec![0, 1, 2])), Some(4.0));
        assert_eq!(verify_witness(&p, &Witness::Tour(vec![0, 1])), None);
    }

    #[test]
    fn tree_verification() {
        let p = ProblemInstance::steiner(path3(), vec![0, 2]);
        assert_eq!(verify_witness(&p, &Witness::Tree(vec![(0, 2)])), Some(2.0));
        assert_eq!(verify_witness(&p, &Witness::Tree(vec![(0, 1)])), None);
    }

    #[test]
    fn facility_verification() {
        let p = ProblemInstance::facility(path3(), vec![5.0, 1.0, 5.0], None);
        // open vertex 1: cost 1 + (1 + 0 + 1)
        assert_eq!(verify_witness(&p, &Witness::Facility(vec![1])), Some(3.0));
        assert_eq!(verify_witness(&p, &Witness::Facility(vec![])), None);
    }
}
