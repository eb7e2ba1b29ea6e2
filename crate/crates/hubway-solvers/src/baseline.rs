//! Constant-factor baselines used to seed the net reduction.

use crate::instance::{ProblemInstance, ProblemKind, SolveResult, Witness};

/// Prim MST over the metric restricted to `vertices`; returns total weight
/// and the chosen metric-pair edges.
pub fn metric_mst(
    m: &hubway_core::graph::MetricInstance,
    vertices: &[usize],
) -> (f64, Vec<(usize, usize)>) {
    if vertices.len() <= 1 {
        return (0.0, Vec::new());
    }
    let k = vertices.len();
    let mut in_tree = vec![false; k];
    let mut best = vec![f64::INFINITY; k];
    let mut best_from = vec![0usize; k];
    in_tree[0] = true;
    for i in 1..k {
        best[i] = m.dist(vertices[0], vertices[i]);
        best_from[i] = 0;
    }
    let mut weight = 0.0;
    let mut edges = Vec::with_capacity(k - 1);
    for _ in 1..k {
        let mut pick = usize::MAX;
        for i in 0..k {
            if !in_tree[i] && (pick == usize::MAX || best[i] < best[pick]) {
                pick = i;
            }
        }
        in_tree[pick] = true;
        weight += best[pick];
        let (a, b) = (vertices[best_from[pick]], vertices[pick]);
        edges.push((a.min(b), a.max(b)));
        for i in 0..k {
            if !in_tree[i] {
                let d = m.dist(vertices[pick], vertices[i]);
                if d < best[i] {
                    best[i] = d;
                    best_from[i] = pick;
                }
            }
        }
    }
    (weight, edges)
}

/// Add-only facility greedy: open the best single facility, then keep
/// opening whichever facility most reduces total cost.
pub fn facility_greedy(p: &ProblemInstance) -> (f64, Vec<usize>) {
    let m = &p.metric;
    let n = m.n();
    let mut open: Vec<usize> = Vec::new();
    let mut serve = vec![f64::INFINITY; n];
    // first facility: cheapest single-facility solution
    let mut first = 0usize;
    let mut first_cost = f64::INFINITY;
    for f in 0..n {
        let cost = p.open_cost[f]
            + (0..n).map(|v| p.phi[v] * m.dist(v, f)).sum::<f64>();
        if cost < first_cost {
            first_cost = cost;
            first = f;
        }
    }
    open.push(first);
    for v in 0..n {
        serve[v] = m.dist(v, first);
    }
    loop {
        let mut best_delta = 0.0;
        let mut best_f = usize::MAX;
        for f in 0..n {
            if open.contains(&f) {
                continue;
            }
            let gain: f64 = (0..n)
                .map(|v| p.phi[v] * (serve[v] - m.dist(v, f)).max(0.0))
                .sum();
            let delta = p.open_cost[f] - gain;
            if delta < best_delta {
                best_delta = delta;
                best_f = f;
            }
        }
        if best_f == usize::MAX {
            break;
        }
        open.push(best_f);
        for v in 0..n {
            serve[v] = serve[v].min(m.dist(v, best_f));
        }
    }
    let cost: f64 = open.iter().map(|&f| p.open_cost[f]).sum::<f64>()
        + (0..n).map(|v| p.phi[v] * serve[v]).sum::<f64>();
    open.sort_unstable();
    (cost, open)
}

/// Constant-factor cost estimate `kappa` with `OPT <= kappa <= C * OPT`
/// (`C = 2` for tours and trees, below 2 for the facility greedy).
pub fn baseline_kappa(p: &ProblemInstance) -> f64 {
    match p.kind {
        ProblemKind::Tsp => {
            let all: Vec<usize> = (0..p.metric.n()).collect();
            2.0 * metric_mst(&p.metric, &all).0
        }
        ProblemKind::Steiner => metric_mst(&p.metric, &p.terminals).0,
        ProblemKind::Facility => facility_greedy(p).0,
    }
}

/// Feasible baseline witness (MST shortcut tour, terminal MST, greedy
/// facilities); used when the main pipeline must fall back.
pub fn baseline_solve(p: &ProblemInstance) -> SolveResult {
    match p.kind {
        ProblemKind::Tsp => {
            let n = p.metric.n();
            let all: Vec<usize> = (0..n).collect();
            let (_, edges) = metric_mst(&p.metric, &all);
            let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
            for &(u, v) in &edges {
                adj[u].push(v);
                adj[v].push(u);
            }
            for list in &mut adj {
                list.sort_unstable();
            }
            let mut tour = Vec::with_capacity(n);
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            while let Some(v) = stack.pop() {
                if seen[v] {
                    continue;
                }
                seen[v] = true;
                tour.push(v);
                for &u in adj[v].iter().rev() {
                    if !seen[u] {
                        stack.push(u);
                    }
                }
            }
            let cost = tour
                .windows(2)
                .map(|w| p.metric.dist(w[0], w[1]))
                .sum::<f64>()
                + if n > 1 {
                    p.metric.dist(*tour.last().unwrap(), tour[0])
                } else {
                    0.0
                };
            SolveResult {
                cost,
                witness: Some(Witness::Tour(tour)),
                method: "baseline".into(),
                feasible: true,
            }
        }
        ProblemKind::Steiner => {
            let (cost, edges) = metric_mst(&p.metric, &p.terminals);
            SolveResult {
                cost,
                witness: Some(Witness::Tree(edges)),
                method: "baseline".into(),
                feasible: true,
            }
        }
        ProblemKind::Facility => {
            let (cost, open) = facility_greedy(p);
            SolveResult {
                cost,
                witness: Some(Witness::Facility(open)),
                method: "baseline".into(),
                feasible: true,
            }
        }
    }
}
