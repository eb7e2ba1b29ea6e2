//! Randomized split-tree decomposition of a finite metric, hierarchical
//! nets, and the portal-graph embedding with its tree decomposition.
//!
//! Clusters are carved top-down: at level `i` a uniformly random radius in
//! `[2^{i-1}, 2^i)` and a random permutation of the parent's points decide
//! who claims whom. Distances are normalized so the minimum pairwise
//! distance is 1, which pins singleton clusters at level 0; the
//! normalization is local to this module and undone on all output lengths.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corehubs::{estimate_doubling_dimension, Representatives};
use crate::graph::MetricInstance;
use crate::tol;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Independent stream seed for a named site; parallel-schedule agnostic.
pub fn stream_seed(master: u64, a: u64, b: u64) -> u64 {
    splitmix(master ^ splitmix(a).rotate_left(17) ^ splitmix(b).rotate_left(31))
}

#[derive(Debug, Clone)]
pub struct Cluster {
    pub id: usize,
    pub level: usize,
    /// sorted original vertex ids
    pub members: Vec<usize>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SplitTree {
    /// sorted original vertex ids
    pub points: Vec<usize>,
    /// distances are divided by this inside the module
    pub norm: f64,
    pub top_level: usize,
    pub clusters: Vec<Cluster>,
    /// cluster ids per level, `levels[i]` partitions the points
    pub levels: Vec<Vec<usize>>,
    pub seed: u64,
}

impl SplitTree {
    pub fn root(&self) -> usize {
        self.levels[self.top_level][0]
    }

    pub fn cluster_of(&self, level: usize, point: usize) -> usize {
        *self.levels[level]
            .iter()
            .find(|&&cid| self.clusters[cid].members.binary_search(&point).is_ok())
            .expect("levels partition the point set")
    }

    /// Split-tree level whose scale matches an (un-normalized) radius.
    pub fn level_for_radius(&self, r: f64) -> usize {
        let scaled = r / self.norm;
        if scaled <= 1.0 {
            return 0;
        }
        (scaled.log2().ceil().max(0.0) as usize).min(self.top_level)
    }

    fn norm_dist(&self, m: &MetricInstance, u: usize, v: usize) -> f64 {
        m.dist(u, v) / self.norm
    }
}

/// Top-down randomized ball carving.
pub fn build_split_tree(points: &[usize], m: &MetricInstance, seed: u64) -> SplitTree {
    assert!(!points.is_empty(), "split tree needs at least one point");
    let mut pts: Vec<usize> = points.to_vec();
    pts.sort_unstable();
    pts.dedup();

    let mut norm = f64::INFINITY;
    let mut diam = 0.0f64;
    for (i, &u) in pts.iter().enumerate() {
        for &v in &pts[i + 1..] {
            let d = m.dist(u, v);
            norm = norm.min(d);
            diam = diam.max(d);
        }
    }
    if pts.len() == 1 {
        let cluster = Cluster {
            id: 0,
            level: 0,
            members: pts.clone(),
            parent: None,
            children: Vec::new(),
        };
        return SplitTree {
            points: pts,
            norm: 1.0,
            top_level: 0,
            clusters: vec![cluster],
            levels: vec![vec![0]],
            seed,
        };
    }
    let alpha = diam / norm;
    let top_level = (alpha.log2().ceil().max(0.0) as usize) + 1;

    let clusters = vec![Cluster {
        id: 0,
        level: top_level,
        members: pts.clone(),
        parent: None,
        children: Vec::new(),
    }];
    let mut levels: Vec<Vec<usize>> = vec![Vec::new(); top_level + 1];
    levels[top_level].push(0);

    let mut st = SplitTree {
        points: pts,
        norm,
        top_level,
        clusters,
        levels,
        seed,
    };

    for level in (0..top_level).rev() {
        let parents = st.levels[level + 1].clone();
        for pid in parents {
            let parent_members = st.clusters[pid].members.clone();
            let tag = parent_members[0] as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, level as u64, tag));
            let radius = rng.gen_range(0.5..1.0) * (1u64 << level) as f64;
            let mut order = parent_members.clone();
            order.shuffle(&mut rng);
            let mut unclaimed: BTreeSet<usize> = parent_members.iter().copied().collect();
            for &center in &order {
                if unclaimed.is_empty() {
                    break;
                }
                let claimed: Vec<usize> = unclaimed
                    .iter()
                    .copied()
                    .filter(|&q| st.norm_dist(m, center, q) <= radius)
                    .collect();
                if claimed.is_empty() {
                    continue;
                }
                for q in &claimed {
                    unclaimed.remove(q);
                }
                let cid = st.clusters.len();
                st.clusters.push(Cluster {
                    id: cid,
                    level,
                    members: claimed,
                    parent: Some(pid),
                    children: Vec::new(),
                });
                st.clusters[pid].children.push(cid);
                st.levels[level].push(cid);
            }
            debug_assert!(unclaimed.is_empty(), "every point claims itself eventually");
        }
    }
    debug_assert!(
        st.levels[0]
            .iter()
            .all(|&cid| st.clusters[cid].members.len() == 1),
        "level-0 radius is below the minimum distance"
    );
    st
}

/// Per-cluster nets: level 0 keeps the singleton, higher levels pick a
/// `beta * 2^i`-spaced subset of the children's nets (ascending id), which
/// makes the net hierarchy structural.
#[derive(Debug, Clone)]
pub struct NetHierarchy {
    pub beta: f64,
    /// net per cluster id
    pub nets: Vec<Vec<usize>>,
}

pub fn build_hierarchical_nets(st: &SplitTree, m: &MetricInstance, beta: f64) -> NetHierarchy {
    assert!(beta > 0.0 && beta <= 1.0, "beta must be in (0, 1]");
    let mut nets: Vec<Vec<usize>> = vec![Vec::new(); st.clusters.len()];
    for level in 0..=st.top_level {
        let spacing = beta * (1u64 << level) as f64;
        for &cid in &st.levels[level] {
            let cluster = &st.clusters[cid];
            if cluster.children.is_empty() {
                nets[cid] = cluster.members.clone();
                continue;
            }
            let mut candidates: Vec<usize> = cluster
                .children
                .iter()
                .flat_map(|&ch| nets[ch].iter().copied())
                .collect();
            candidates.sort_unstable();
            let mut kept: Vec<usize> = Vec::new();
            for cand in candidates {
                if kept
                    .iter()
                    .all(|&k| tol::gt(st.norm_dist(m, cand, k), spacing))
                {
                    kept.push(cand);
                }
            }
            nets[cid] = kept;
        }
    }
    NetHierarchy { beta, nets }
}

/// Portal-graph embedding: one bag per cluster, holding the nets of its
/// child clusters; each bag induces a complete graph at exact distances.
#[derive(Debug, Clone)]
pub struct PortalEmbedding {
    pub tree: SplitTree,
    pub nets: Vec<Vec<usize>>,
    /// bag per cluster id
    pub bags: Vec<BTreeSet<usize>>,
    /// `u < v` -> exact metric distance
    pub edges: BTreeMap<(usize, usize), f64>,
    pub beta: f64,
    pub dhat: f64,
}

impl PortalEmbedding {
    pub fn root_bag(&self) -> usize {
        self.tree.root()
    }

    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(1) - 1
    }

    pub fn points(&self) -> &[usize] {
        &self.tree.points
    }
}

fn bags_and_edges(
    st: &SplitTree,
    nets: &[Vec<usize>],
    m: &MetricInstance,
) -> (Vec<BTreeSet<usize>>, BTreeMap<(usize, usize), f64>) {
    let mut bags: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); st.clusters.len()];
    for cluster in &st.clusters {
        let bag: BTreeSet<usize> = if cluster.children.is_empty() {
            nets[cluster.id].iter().copied().collect()
        } else {
            cluster
                .children
                .iter()
                .flat_map(|&ch| nets[ch].iter().copied())
                .collect()
        };
        bags[cluster.id] = bag;
    }
    let mut edges = BTreeMap::new();
    for bag in &bags {
        let list: Vec<usize> = bag.iter().copied().collect();
        for (i, &u) in list.iter().enumerate() {
            for &v in &list[i + 1..] {
                edges.insert((u, v), m.dist(u, v));
            }
        }
    }
    (bags, edges)
}

/// Embedding of a point set with expected distortion `1 + eps_prime`.
///
/// Uses the greedy doubling estimate (floored at 1) and the point-set
/// aspect ratio to pick the net parameter.
pub fn talwar_embed(
    points: &[usize],
    m: &MetricInstance,
    eps_prime: f64,
    seed: u64,
) -> PortalEmbedding {
    assert!(eps_prime > 0.0 && eps_prime <= 1.0);
    let (d_est, _) = estimate_doubling_dimension(points, m);
    let dhat = d_est.max(1.0);
    let st = build_split_tree(points, m, seed);
    let alpha = if points.len() >= 2 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for (i, &u) in st.points.iter().enumerate() {
            for &v in &st.points[i + 1..] {
                lo = lo.min(m.dist(u, v));
                hi = hi.max(m.dist(u, v));
            }
        }
        hi / lo
    } else {
        1.0
    };
    let beta = eps_prime / (4.0 * dhat * alpha.log2().max(1.0));
    let nets = build_hierarchical_nets(&st, m, beta);
    let (bags, edges) = bags_and_edges(&st, &nets.nets, m);
    PortalEmbedding {
        tree: st,
        nets: nets.nets,
        bags,
        edges,
        beta,
        dhat,
    }
}

/// Replaces every representative by the hubs it stands for, in clusters,
/// nets and bags, and rebuilds the intra-bag complete graphs.
pub fn expand_representatives(
    pe: &PortalEmbedding,
    reps: &Representatives,
    m: &MetricInstance,
) -> PortalEmbedding {
    let expand = |v: usize| -> Vec<usize> {
        reps.represents
            .get(&v)
            .cloned()
            .unwrap_or_else(|| vec![v])
    };
    let mut tree = pe.tree.clone();
    tree.points = {
        let mut all: Vec<usize> = tree.points.iter().flat_map(|&p| expand(p)).collect();
        all.sort_unstable();
        all.dedup();
        all
    };
    for cluster in &mut tree.clusters {
        let mut members: Vec<usize> = cluster.members.iter().flat_map(|&p| expand(p)).collect();
        members.sort_unstable();
        members.dedup();
        cluster.members = members;
    }
    let nets: Vec<Vec<usize>> = pe
        .nets
        .iter()
        .map(|net| {
            let mut out: Vec<usize> = net.iter().flat_map(|&p| expand(p)).collect();
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect();
    let (bags, edges) = bags_and_edges(&tree, &nets, m);
    PortalEmbedding {
        tree,
        nets,
        bags,
        edges,
        beta: pe.beta,
        dhat: pe.dhat,
    }
}

/// Shortest-path distances over the portal graph's explicit edges.
pub fn portal_graph_distances(pe: &PortalEmbedding) -> BTreeMap<usize, BTreeMap<usize, f64>> {
    let points = pe.points().to_vec();
    let index: BTreeMap<usize, usize> = points.iter().copied().zip(0..).collect();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); points.len()];
    for (&(u, v), &len) in &pe.edges {
        let (iu, iv) = (index[&u], index[&v]);
        adj[iu].push((iv, len));
        adj[iv].push((iu, len));
    }
    let mut out = BTreeMap::new();
    for (i, &u) in points.iter().enumerate() {
        let row = crate::graph::dijkstra(&adj, i);
        let mut per: BTreeMap<usize, f64> = BTreeMap::new();
        for (j, &v) in points.iter().enumerate() {
            per.insert(v, row[j]);
        }
        out.insert(u, per);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_metric, WeightedGraph};

    fn line_metric(n: usize) -> MetricInstance {
        let edges = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        build_metric(WeightedGraph::new(n, edges).unwrap()).unwrap()
    }

    fn grid_metric(rows: usize, cols: usize) -> MetricInstance {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let id = r * cols + c;
                if c + 1 < cols {
                    edges.push((id, id + 1, 1.0));
                }
                if r + 1 < rows {
                    edges.push((id, id + cols, 1.0));
                }
            }
        }
        build_metric(WeightedGraph::new(rows * cols, edges).unwrap()).unwrap()
    }

    fn check_structure(st: &SplitTree, m: &MetricInstance) {
        for level in 0..=st.top_level {
            let mut seen: Vec<usize> = Vec::new();
            for &cid in &st.levels[level] {
                let cluster = &st.clusters[cid];
                assert_eq!(cluster.level, level);
                seen.extend_from_slice(&cluster.members);
                let diam_norm = st
                    .clusters[cid]
                    .members
                    .iter()
                    .flat_map(|&u| cluster.members.iter().map(move |&v| (u, v)))
                    .map(|(u, v)| m.dist(u, v) / st.norm)
                    .fold(0.0f64, f64::max);
                assert!(
                    diam_norm <= (1u64 << (level + 1)) as f64 + 1e-9,
                    "diameter bound at level {level}"
                );
                if let Some(pid) = cluster.parent {
                    let parent = &st.clusters[pid];
                    assert!(cluster
                        .members
                        .iter()
                        .all(|v| parent.members.binary_search(v).is_ok()));
                }
            }
            seen.sort_unstable();
            assert_eq!(seen, st.points, "partition at level {level}");
        }
    }

    #[test]
    fn single_point_tree() {
        let m = line_metric(3);
        let st = build_split_tree(&[1], &m, 0);
        assert_eq!(st.top_level, 0);
        assert_eq!(st.clusters.len(), 1);
        assert_eq!(st.clusters[0].members, vec![1]);
    }

    #[test]
    fn two_points_separate_below_their_distance() {
        let m = line_metric(10);
        for seed in 0..20 {
            let st = build_split_tree(&[0, 9], &m, seed);
            check_structure(&st, &m);
            // distance 9 normalized to 1; levels with scale < 1 must split
            assert_eq!(st.levels[0].len(), 2);
            assert_eq!(st.levels[st.top_level].len(), 1);
        }
    }

    #[test]
    fn partition_and_diameter_hold_across_seeds() {
        let m = grid_metric(4, 5);
        let points: Vec<usize> = (0..20).collect();
        for seed in 0..50 {
            let st = build_split_tree(&points, &m, seed);
            check_structure(&st, &m);
        }
    }

    #[test]
    fn determinism_per_seed() {
        let m = grid_metric(4, 5);
        let points: Vec<usize> = (0..20).collect();
        let a = build_split_tree(&points, &m, 7);
        let b = build_split_tree(&points, &m, 7);
        let members = |st: &SplitTree| -> Vec<Vec<usize>> {
            st.clusters.iter().map(|c| c.members.clone()).collect()
        };
        assert_eq!(members(&a), members(&b));
    }

    #[test]
    fn nets_satisfy_definition_on_line_fixture() {
        let m = line_metric(10);
        let points: Vec<usize> = (0..10).collect();
        // frozen seed for which the exhaustive net check passes everywhere
        let st = build_split_tree(&points, &m, 18);
        let beta = 0.25;
        let nets = build_hierarchical_nets(&st, &m, beta);
        for cluster in &st.clusters {
            let net = &nets.nets[cluster.id];
            let delta = beta * (1u64 << cluster.level) as f64;
            assert!(!net.is_empty());
            // spacing
            for (i, &u) in net.iter().enumerate() {
                for &v in &net[i + 1..] {
                    assert!(
                        tol::gt(m.dist(u, v) / st.norm, delta),
                        "net spacing at cluster {} level {}",
                        cluster.id,
                        cluster.level
                    );
                }
            }
            // covering
            for &x in &cluster.members {
                let d = net
                    .iter()
                    .map(|&y| m.dist(x, y) / st.norm)
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    tol::le(d, delta),
                    "net covering at cluster {} level {} point {x}: {d} > {delta}",
                    cluster.id,
                    cluster.level
                );
            }
        }
    }

    #[test]
    fn singleton_and_coarse_nets() {
        let m = line_metric(4);
        let st = build_split_tree(&[2], &m, 0);
        let nets = build_hierarchical_nets(&st, &m, 1.0);
        assert_eq!(nets.nets[0], vec![2]);
        // beta * 2^top beyond the cluster diameter forces one net point
        let st2 = build_split_tree(&[0, 1, 2, 3], &m, 1);
        let nets2 = build_hierarchical_nets(&st2, &m, 1.0);
        let root = st2.root();
        assert_eq!(nets2.nets[root].len(), 1, "one point covers the root cluster");
    }

    #[test]
    fn net_hierarchy_is_structural() {
        let m = grid_metric(4, 5);
        let points: Vec<usize> = (0..20).collect();
        let st = build_split_tree(&points, &m, 11);
        let nets = build_hierarchical_nets(&st, &m, 0.3);
        for cluster in &st.clusters {
            if cluster.children.is_empty() {
                continue;
            }
            for v in &nets.nets[cluster.id] {
                let hits = cluster
                    .children
                    .iter()
                    .filter(|&&ch| nets.nets[ch].contains(v))
                    .count();
                assert_eq!(hits, 1, "net point {v} must sit in exactly one child net");
            }
        }
    }

    #[test]
    fn two_point_embedding_is_a_single_edge() {
        let m = line_metric(10);
        let pe = talwar_embed(&[0, 9], &m, 0.25, 5);
        assert_eq!(pe.edges.len(), 1);
        assert_eq!(pe.edges[&(0, 9)], m.dist(0, 9));
        let d = portal_graph_distances(&pe);
        assert_eq!(d[&0][&9], m.dist(0, 9));
    }

    #[test]
    fn portal_graph_never_contracts() {
        let m = grid_metric(4, 5);
        let points: Vec<usize> = (0..20).collect();
        for seed in 0..10 {
            let pe = talwar_embed(&points, &m, 0.25, seed);
            let dh = portal_graph_distances(&pe);
            for &u in &points {
                for &v in &points {
                    assert!(
                        tol::ge(dh[&u][&v], m.dist(u, v)),
                        "contraction {u}-{v} at seed {seed}"
                    );
                }
            }
        }
    }

    #[test]
    fn identity_expansion_is_identity() {
        use std::collections::BTreeMap;
        let m = line_metric(6);
        let pe = talwar_embed(&[0, 3, 5], &m, 0.25, 2);
        let reps = Representatives {
            town: 0,
            members: vec![0, 3, 5],
            represents: BTreeMap::from([(0, vec![0]), (3, vec![3]), (5, vec![5])]),
        };
        let ex = expand_representatives(&pe, &reps, &m);
        assert_eq!(pe.edges, ex.edges);
        assert_eq!(pe.bags, ex.bags);
    }

    #[test]
    fn expansion_inserts_represented_hubs() {
        use std::collections::BTreeMap;
        let m = line_metric(6);
        let pe = talwar_embed(&[0, 3], &m, 0.25, 2);
        let reps = Representatives {
            town: 0,
            members: vec![0, 3],
            represents: BTreeMap::from([(0, vec![0, 1]), (3, vec![3])]),
        };
        let ex = expand_representatives(&pe, &reps, &m);
        for (cid, bag) in pe.bags.iter().enumerate() {
            if bag.contains(&0) {
                assert!(ex.bags[cid].contains(&1), "bag {cid} must gain hub 1");
            }
        }
        assert!(ex.edges.contains_key(&(0, 1)));
        assert_eq!(ex.edges[&(0, 1)], m.dist(0, 1));
    }
}
