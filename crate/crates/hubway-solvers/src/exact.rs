//! Brute-force oracles: Held–Karp for tours, Dreyfus–Wagner for Steiner
//! trees, and subset enumeration for facility location. Desk-scale only,
//! guarded by hard size limits.

use crate::instance::{ProblemInstance, ProblemKind, SolveResult, Witness};
use crate::SolverError;

pub const TSP_MAX_N: usize = 14;
pub const STEINER_MAX_TERMINALS: usize = 10;
pub const FACILITY_MAX_N: usize = 18;

/// Provably optimal solution by exhaustive methods.
pub fn exact_solve(p: &ProblemInstance) -> Result<SolveResult, SolverError> {
    match p.kind {
        ProblemKind::Tsp => {
            let n = p.metric.n();
            if n > TSP_MAX_N {
                return Err(SolverError::SizeGuard(format!(
                    "held-karp limited to n <= {TSP_MAX_N}, got {n}"
                )));
            }
            let (cost, tour) = held_karp(p);
            Ok(SolveResult {
                cost,
                witness: Some(Witness::Tour(tour)),
                method: "exact".into(),
                feasible: true,
            })
        }
        ProblemKind::Steiner => {
            if p.terminals.len() > STEINER_MAX_TERMINALS {
                return Err(SolverError::SizeGuard(format!(
                    "dreyfus-wagner limited to {STEINER_MAX_TERMINALS} terminals, got {}",
                    p.terminals.len()
                )));
            }
            let (cost, edges) = dreyfus_wagner(p);
            Ok(SolveResult {
                cost,
                witness: Some(Witness::Tree(edges)),
                method: "exact".into(),
                feasible: true,
            })
        }
        ProblemKind::Facility => {
            let n = p.metric.n();
            if n > FACILITY_MAX_N {
                return Err(SolverError::SizeGuard(format!(
                    "facility enumeration limited to n <= {FACILITY_MAX_N}, got {n}"
                )));
            }
            let (cost, open) = facility_enumerate(p);
            Ok(SolveResult {
                cost,
                witness: Some(Witness::Facility(open)),
                method: "exact".into(),
                feasible: true,
            })
        }
    }
}

/// Optimal tour over the metric by bitmask dynamic programming.
pub fn held_karp(p: &ProblemInstance) -> (f64, Vec<usize>) {
    let m = &p.metric;
    let n = m.n();
    if n == 1 {
        return (0.0, vec![0]);
    }
    if n == 2 {
        return (2.0 * m.dist(0, 1), vec![0, 1]);
    }
    let full = (1usize << n) - 1;
    let mut dp = vec![f64::INFINITY; (1 << n) * n];
    let mut parent = vec![usize::MAX; (1 << n) * n];
    dp[(1 << 0) * n] = 0.0; // state (mask {0}, at 0)
    for mask in 1..=full {
        if mask & 1 == 0 {
            continue;
        }
        for last in 0..n {
            if mask & (1 << last) == 0 {
                continue;
            }
            let cur = dp[mask * n + last];
            if !cur.is_finite() {
                continue;
            }
            for next in 1..n {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let nm = mask | (1 << next);
                let cand = cur + m.dist(last, next);
                if cand < dp[nm * n + next] {
                    dp[nm * n + next] = cand;
                    parent[nm * n + next] = last;
                }
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut best_last = usize::MAX;
    for last in 1..n {
        let cand = dp[full * n + last] + m.dist(last, 0);
        if cand < best {
            best = cand;
            best_last = last;
        }
    }
    let mut tour = Vec::with_capacity(n);
    let mut mask = full;
    let mut cur = best_last;
    while cur != usize::MAX {
        tour.push(cur);
        let prev = parent[mask * n + cur];
        mask &= !(1 << cur);
        cur = prev;
    }
    tour.reverse();
    debug_assert_eq!(tour[0], 0);
    (best, tour)
}

/// Optimal Steiner tree over the metric; result edges are metric pairs.
pub fn dreyfus_wagner(p: &ProblemInstance) -> (f64, Vec<(usize, usize)>) {
    let m = &p.metric;
    let n = m.n();
    let terms = &p.terminals;
    let t = terms.len();
    if t <= 1 {
        return (0.0, Vec::new());
    }
    // dp[s][v]: cost of a tree connecting terminal subset s (of terms[..t-1])
    // together with vertex v
    let subsets = 1usize << (t - 1);
    let mut dp = vec![f64::INFINITY; subsets * n];
    #[derive(Clone, Copy, PartialEq)]
    enum Back {
        None,
        Base,
        Extend(usize),
        Merge(usize),
    }
    let mut back = vec![Back::None; subsets * n];
    for (ti, &term) in terms[..t - 1].iter().enumerate() {
        let s = 1usize << ti;
        for v in 0..n {
            dp[s * n + v] = m.dist(term, v);
            back[s * n + v] = Back::Base;
        }
    }
    for s in 1..subsets {
        if s.count_ones() >= 2 {
            // merge two sub-trees at v
            for v in 0..n {
                let mut sub = (s - 1) & s;
                while sub > 0 {
                    if sub < s - sub || (sub == s - sub) {
                        let cand = dp[sub * n + v] + dp[(s - sub) * n + v];
                        if cand < dp[s * n + v] {
                            dp[s * n + v] = cand;
                            back[s * n + v] = Back::Merge(sub);
                        }
                    }
                    sub = (sub - 1) & s;
                }
            }
        }
        // extend: connect v to the best u (single metric hop suffices)
        let base: Vec<f64> = (0..n).map(|u| dp[s * n + u]).collect();
        for v in 0..n {
            for (u, &bu) in base.iter().enumerate() {
                let cand = bu + m.dist(u, v);
                if cand < dp[s * n + v] {
                    dp[s * n + v] = cand;
                    back[s * n + v] = Back::Extend(u);
                }
            }
        }
    }
    let root = terms[t - 1];
    let full = subsets - 1;
    let cost = dp[full * n + root];
    // reconstruct edges
    let mut edges = Vec::new();
    let mut stack = vec![(full, root)];
    while let Some((s, v)) = stack.pop() {
        match back[s * n + v] {
            Back::None => {}
            Back::Base => {
                let ti = s.trailing_zeros() as usize;
                let term = terms[ti];
                if term != v {
                    edges.push((term.min(v), term.max(v)));
                }
            }
            Back::Extend(u) => {
                if u != v {
                    edges.push((u.min(v), u.max(v)));
                }
                stack.push((s, u));
            }
            Back::Merge(sub) => {
                stack.push((sub, v));
                stack.push((s - sub, v));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    (cost, edges)
}

/// Optimal facility set by subset enumeration.
pub fn facility_enumerate(p: &ProblemInstance) -> (f64, Vec<usize>) {
    let m = &p.metric;
    let n = m.n();
    let mut best = f64::INFINITY;
    let mut best_mask = 0usize;
    for mask in 1usize..(1 << n) {
        let mut cost = 0.0;
        for v in 0..n {
            if mask & (1 << v) != 0 {
                cost += p.open_cost[v];
            }
        }
        if cost >= best {
            continue;
        }
        for v in 0..n {
            let mut d = f64::INFINITY;
            for w in 0..n {
                if mask & (1 << w) != 0 {
                    d = d.min(m.dist(v, w));
                }
            }
            cost += p.phi[v] * d;
            if cost >= best {
                break;
            }
        }
        if cost < best {
            best = cost;
            best_mask = mask;
        }
    }
    let open = (0..n).filter(|v| best_mask & (1 << v) != 0).collect();
    (best, open)
}
