//! Weighted graphs and their shortest-path metrics.
//!
//! A [`MetricInstance`] owns the full distance matrix together with a
//! deterministic unique-shortest-path rule: for every unordered pair the
//! canonical path is the lexicographically smallest vertex sequence among
//! all shortest paths, read from the smaller endpoint. The rule replaces
//! random length perturbation and is reproducible across runs.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::tol;

/// Multiplier used when rescaling so the minimum distance sits strictly
/// above `c/2` (by this relative margin).
pub const RESCALE_ETA: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("bad edge: {0}")]
    BadEdge(String),
    #[error("disconnected")]
    Disconnected,
}

/// Undirected graph with strictly positive edge lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self, GraphError> {
        let g = WeightedGraph { n, edges };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        for &(u, v, len) in &self.edges {
            if u >= self.n || v >= self.n {
                return Err(GraphError::BadEdge(format!(
                    "endpoint out of range in ({u}, {v})"
                )));
            }
            if u == v {
                return Err(GraphError::BadEdge(format!("self-loop at {u}")));
            }
            if !(len.is_finite() && len > 0.0) {
                return Err(GraphError::BadEdge(format!(
                    "non-positive length {len} on ({u}, {v})"
                )));
            }
        }
        Ok(())
    }

    fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v, len) in &self.edges {
            adj[u].push((v, len));
            adj[v].push((u, len));
        }
        for list in &mut adj {
            list.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        }
        adj
    }
}

/// Shortest-path metric of a connected [`WeightedGraph`].
#[derive(Debug, Clone)]
pub struct MetricInstance {
    pub graph: WeightedGraph,
    adj: Vec<Vec<(usize, f64)>>,
    dist: Vec<f64>,
    pub diam: f64,
    pub min_dist: f64,
    pub aspect_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct HeapEntry {
    cost_bits: u64,
    node: usize,
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        f64::from_bits(self.cost_bits)
            .total_cmp(&f64::from_bits(other.cost_bits))
            .then(self.node.cmp(&other.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra over an adjacency list; `f64::INFINITY` marks unreachable nodes.
pub fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse(HeapEntry {
        cost_bits: 0f64.to_bits(),
        node: source,
    }));
    while let Some(Reverse(HeapEntry { cost_bits, node })) = heap.pop() {
        let cost = f64::from_bits(cost_bits);
        if cost > dist[node] {
            continue;
        }
        for &(next, len) in &adj[node] {
            let cand = cost + len;
            if cand < dist[next] {
                dist[next] = cand;
                heap.push(Reverse(HeapEntry {
                    cost_bits: cand.to_bits(),
                    node: next,
                }));
            }
        }
    }
    dist
}

/// Builds the exact shortest-path metric of `g`.
///
/// Fails with [`GraphError::Disconnected`] when some vertex is unreachable
/// and [`GraphError::BadEdge`] on malformed input.
pub fn build_metric(g: WeightedGraph) -> Result<MetricInstance, GraphError> {
    g.validate()?;
    let n = g.n;
    if n == 0 {
        return Err(GraphError::BadEdge("empty graph".into()));
    }
    let adj = g.adjacency();
    let mut dist = vec![0.0; n * n];
    for s in 0..n {
        let row = dijkstra(&adj, s);
        if row.iter().any(|d| !d.is_finite()) {
            return Err(GraphError::Disconnected);
        }
        dist[s * n..(s + 1) * n].copy_from_slice(&row);
    }
    Ok(MetricInstance::from_parts(g, adj, dist))
}

impl MetricInstance {
    fn from_parts(graph: WeightedGraph, adj: Vec<Vec<(usize, f64)>>, dist: Vec<f64>) -> Self {
        let n = graph.n;
        let mut diam = 0.0f64;
        let mut min_dist = f64::INFINITY;
        for u in 0..n {
            for v in (u + 1)..n {
                let d = dist[u * n + v];
                diam = diam.max(d);
                min_dist = min_dist.min(d);
            }
        }
        let aspect_ratio = if min_dist.is_finite() && min_dist > 0.0 {
            diam / min_dist
        } else {
            1.0
        };
        MetricInstance {
            graph,
            adj,
            dist,
            diam,
            min_dist,
            aspect_ratio,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.graph.n
    }

    #[inline]
    pub fn dist(&self, u: usize, v: usize) -> f64 {
        self.dist[u * self.graph.n + v]
    }

    pub fn adjacency(&self) -> &[Vec<(usize, f64)>] {
        &self.adj
    }

    /// Closed ball `{u : dist(u, v) <= r}`, sorted by id.
    pub fn ball(&self, v: usize, r: f64) -> Vec<usize> {
        (0..self.n()).filter(|&u| tol::le(self.dist(v, u), r)).collect()
    }

    /// Distance from a vertex to a set (infinity for an empty set).
    pub fn dist_to_set(&self, v: usize, set: &[usize]) -> f64 {
        set.iter()
            .map(|&u| self.dist(v, u))
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum pairwise distance between two sets.
    pub fn dist_set_set(&self, a: &[usize], b: &[usize]) -> f64 {
        let mut best = f64::INFINITY;
        for &u in a {
            for &v in b {
                best = best.min(self.dist(u, v));
            }
        }
        best
    }

    /// Diameter of a vertex subset.
    pub fn diam_of(&self, set: &[usize]) -> f64 {
        let mut best = 0.0f64;
        for (i, &u) in set.iter().enumerate() {
            for &v in &set[i + 1..] {
                best = best.max(self.dist(u, v));
            }
        }
        best
    }

    /// Canonical shortest path from `u` to `v`.
    ///
    /// The path for the unordered pair is the lexicographically smallest
    /// vertex sequence among all shortest paths read from the smaller
    /// endpoint; asking from the larger endpoint returns it reversed.
    pub fn canonical_shortest_path(&self, u: usize, v: usize) -> Vec<usize> {
        if u == v {
            return vec![u];
        }
        let (a, b) = (u.min(v), u.max(v));
        let mut path = Vec::new();
        let mut cur = a;
        path.push(cur);
        while cur != b {
            let remaining = self.dist(cur, b);
            let mut next = None;
            for &(x, w) in &self.adj[cur] {
                if tol::le(w + self.dist(x, b), remaining) {
                    next = Some(x);
                    break; // adjacency sorted by id: first hit is the smallest
                }
            }
            cur = next.expect("metric is consistent with its graph");
            path.push(cur);
        }
        if u > v {
            path.reverse();
        }
        path
    }

    /// Length of a vertex sequence measured with metric distances.
    pub fn path_length(&self, path: &[usize]) -> f64 {
        path.windows(2).map(|w| self.dist(w[0], w[1])).sum()
    }
}

/// Rescales all lengths by one factor so the minimum pairwise distance
/// becomes `(c/2)·(1 + η)`. A single-vertex metric is returned unchanged.
pub fn rescale_min_distance(m: &MetricInstance, c: f64) -> MetricInstance {
    assert!(c >= 4.0, "scale constant must be at least 4");
    if m.n() <= 1 || !m.min_dist.is_finite() {
        return m.clone();
    }
    let target = (c / 2.0) * (1.0 + RESCALE_ETA);
    let factor = target / m.min_dist;
    scale_metric(m, factor)
}

fn scale_metric(m: &MetricInstance, factor: f64) -> MetricInstance {
    let graph = WeightedGraph {
        n: m.graph.n,
        edges: m
            .graph
            .edges
            .iter()
            .map(|&(u, v, len)| (u, v, len * factor))
            .collect(),
    };
    let adj = m
        .adj
        .iter()
        .map(|list| list.iter().map(|&(v, w)| (v, w * factor)).collect())
        .collect();
    let dist = m.dist.iter().map(|d| d * factor).collect();
    MetricInstance::from_parts(graph, adj, dist)
}

/// Builds the metric of the complete graph over `points` with edge lengths
/// taken from `m`. Vertex `i` of the result is `points[i]`.
pub fn submetric_complete(m: &MetricInstance, points: &[usize]) -> MetricInstance {
    let n = points.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j, m.dist(points[i], points[j])));
        }
    }
    let graph = WeightedGraph { n, edges };
    let adj = graph.adjacency();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = m.dist(points[i], points[j]);
        }
    }
    MetricInstance::from_parts(graph, adj, dist)
}
