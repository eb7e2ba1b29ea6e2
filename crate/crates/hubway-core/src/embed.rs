//! Recursive town embedding: portal-embed the approximate core hubs, embed
//! child towns, wire each child to its connecting bag and merge the tree
//! decompositions with the two repair steps that restore validity.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corehubs::{
    compute_approx_core_hubs, compute_cores, estimate_doubling_dimension,
    select_representatives, ApproxCoreHubs, CoreChain, Representatives,
};
use crate::graph::{dijkstra, MetricInstance};
use crate::spc::{CoverLadder, HdConfig};
use crate::splittree::{expand_representatives, stream_seed, talwar_embed, PortalEmbedding};
use crate::tol;
use crate::towns::TownsDecomposition;
use crate::treedecomp::{validate_decomposition, BagNode, BagTree};

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("missing core hubs in town {0} with {1} children")]
    MissingCoreHubs(usize, usize),
    #[error("town {0} has exactly one child")]
    SingleChild(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    IntraBag,
    Connector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HEdge {
    pub len: f64,
    pub kind: EdgeKind,
}

/// Embedding of one town: a graph whose edges carry exact input distances,
/// plus a rooted tree decomposition.
#[derive(Debug, Clone)]
pub struct Embedding {
    /// sorted town vertices
    pub vertices: Vec<usize>,
    /// `u < v` -> edge
    pub edges: BTreeMap<(usize, usize), HEdge>,
    pub decomp: BagTree,
    pub width: usize,
    pub seed: u64,
}

impl Embedding {
    /// Shortest-path distances over the embedding's explicit edges.
    pub fn distances(&self) -> BTreeMap<usize, BTreeMap<usize, f64>> {
        let index: BTreeMap<usize, usize> =
            self.vertices.iter().copied().zip(0..).collect();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.vertices.len()];
        for (&(u, v), e) in &self.edges {
            let (iu, iv) = (index[&u], index[&v]);
            adj[iu].push((iv, e.len));
            adj[iv].push((iu, e.len));
        }
        let mut out = BTreeMap::new();
        for (i, &u) in self.vertices.iter().enumerate() {
            let row = dijkstra(&adj, i);
            let per: BTreeMap<usize, f64> = self
                .vertices
                .iter()
                .enumerate()
                .map(|(j, &v)| (v, row[j]))
                .collect();
            out.insert(u, per);
        }
        out
    }
}

/// Where a child town is wired into its parent's hub embedding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnectingBagChoice {
    pub child: usize,
    pub sibling: usize,
    /// level with `dist(T', T'') ∈ (r_i, r_{i+1}]`
    pub level: usize,
    /// closest member of the hub set to the child town
    pub hub: usize,
    pub bar_i: usize,
    pub bar_l: usize,
    /// cluster (= bag) id inside the hub embedding
    pub bag: usize,
}

/// Per-town data that does not depend on the seed.
#[derive(Debug, Clone)]
pub struct TownData {
    pub chain: CoreChain,
    pub hubs: ApproxCoreHubs,
    pub reps: Representatives,
    pub dhat: f64,
}

/// Reusable embedder: seed-independent town data is computed once, then
/// `embed` draws one embedding per seed.
pub struct Embedder<'a> {
    pub m: &'a MetricInstance,
    pub td: &'a TownsDecomposition,
    pub ladder: &'a CoverLadder,
    pub cfg: &'a HdConfig,
    town_data: Vec<Option<TownData>>,
}

impl<'a> Embedder<'a> {
    pub fn new(
        m: &'a MetricInstance,
        td: &'a TownsDecomposition,
        ladder: &'a CoverLadder,
        cfg: &'a HdConfig,
    ) -> Result<Self, EmbedError> {
        let mut town_data = vec![None; td.towns.len()];
        for town in &td.towns {
            if town.children.is_empty() {
                continue;
            }
            if town.children.len() == 1 {
                return Err(EmbedError::SingleChild(town.id));
            }
            let chain = compute_cores(td, town.id);
            let hubs = compute_approx_core_hubs(m, town.id, &chain, ladder, cfg);
            if hubs.is_empty() {
                return Err(EmbedError::MissingCoreHubs(town.id, town.children.len()));
            }
            let reps = select_representatives(town.id, &hubs, td);
            let (d_est, _) = estimate_doubling_dimension(&hubs.union, m);
            town_data[town.id] = Some(TownData {
                chain,
                hubs,
                reps,
                dhat: d_est.max(1.0),
            });
        }
        Ok(Embedder {
            m,
            td,
            ladder,
            cfg,
            town_data,
        })
    }

    pub fn town_data(&self, town: usize) -> Option<&TownData> {
        self.town_data[town].as_ref()
    }

    /// Embeds the root town.
    pub fn embed(&self, seed: u64) -> Embedding {
        self.embed_town(self.td.root, seed)
    }

    /// Embeds a town (and recursively its children) for one seed.
    pub fn embed_town(&self, town_id: usize, seed: u64) -> Embedding {
        let town = self.td.town(town_id);
        if town.children.is_empty() {
            let v = town.vertices[0];
            return Embedding {
                vertices: vec![v],
                edges: BTreeMap::new(),
                decomp: BagTree::new_single(BTreeSet::from([v])),
                width: 0,
                seed,
            };
        }
        let data = self.town_data[town_id].as_ref().expect("non-leaf town data");

        let pe_y = talwar_embed(
            &data.reps.members,
            self.m,
            self.cfg.epsilon_prime,
            stream_seed(seed, town_id as u64, 0xE),
        );
        let pe_x = expand_representatives(&pe_y, &data.reps, self.m);

        // D_X: one bag per cluster, same ids
        let n_dx = pe_x.tree.clusters.len();
        let mut decomp = BagTree {
            bags: pe_x
                .tree
                .clusters
                .iter()
                .map(|c| BagNode {
                    id: c.id,
                    parent: c.parent,
                    children: c.children.clone(),
                    members: pe_x.bags[c.id].clone(),
                })
                .collect(),
            root: pe_x.root_bag(),
        };
        let mut edges: BTreeMap<(usize, usize), HEdge> = pe_x
            .edges
            .iter()
            .map(|(&k, &len)| (k, HEdge { len, kind: EdgeKind::IntraBag }))
            .collect();

        // children in peel order: higher levels first, ties by town id
        let mut children = town.children.clone();
        children.sort_by_key(|&c| (std::cmp::Reverse(self.td.town(c).peel_level), c));

        struct Wired {
            child: usize,
            snapshot: Vec<usize>,
            bag: usize,
            subtree: Vec<usize>,
        }
        let mut wired: Vec<Wired> = Vec::new();

        for &child_id in &children {
            let choice = self
                .connecting_bag(town_id, child_id, &pe_x, data.dhat)
                .expect("non-leaf towns have at least two children");
            let snapshot: Vec<usize> = decomp.bags[choice.bag].members.iter().copied().collect();
            let child_emb = self.embed_town(child_id, seed);

            for (&(u, v), e) in &child_emb.edges {
                edges.entry((u, v)).or_insert(*e);
            }
            let child_town = self.td.town(child_id);
            for &u in &child_town.vertices {
                for &v in &snapshot {
                    if u == v {
                        continue;
                    }
                    let key = (u.min(v), u.max(v));
                    edges.entry(key).or_insert(HEdge {
                        len: self.m.dist(u, v),
                        kind: EdgeKind::Connector,
                    });
                }
            }
            let map = decomp.absorb(&child_emb.decomp, choice.bag);
            wired.push(Wired {
                child: child_id,
                snapshot,
                bag: choice.bag,
                subtree: map,
            });
        }

        // repair steps: (1) copy the connecting bag into every bag of the
        // child's decomposition, (2) push the child's hubs into those bags
        // and into the connecting bag and its descendants within D_X
        for w in &wired {
            for &b in &w.subtree {
                decomp.bags[b].members.extend(w.snapshot.iter().copied());
            }
            let child_set: BTreeSet<usize> =
                self.td.town(w.child).vertices.iter().copied().collect();
            let hubs_in_child: Vec<usize> = data
                .hubs
                .union
                .iter()
                .copied()
                .filter(|v| child_set.contains(v))
                .collect();
            if hubs_in_child.is_empty() {
                continue;
            }
            for &b in &w.subtree {
                decomp.bags[b].members.extend(hubs_in_child.iter().copied());
            }
            let mut stack = vec![w.bag];
            while let Some(cid) = stack.pop() {
                decomp.bags[cid].members.extend(hubs_in_child.iter().copied());
                for &ch in &pe_x.tree.clusters[cid].children {
                    debug_assert!(ch < n_dx);
                    stack.push(ch);
                }
            }
        }

        let width = decomp.width();
        Embedding {
            vertices: town.vertices.clone(),
            edges,
            decomp,
            width,
            seed,
        }
    }

    /// Connecting-bag rule: the bag of the cluster that contains the hub
    /// closest to the child, a fixed number of split-tree levels above the
    /// scale of the child's closest-sibling distance.
    pub fn connecting_bag(
        &self,
        town_id: usize,
        child_id: usize,
        pe_x: &PortalEmbedding,
        dhat: f64,
    ) -> Result<ConnectingBagChoice, EmbedError> {
        let town = self.td.town(town_id);
        let data = self.town_data[town_id]
            .as_ref()
            .ok_or(EmbedError::MissingCoreHubs(town_id, town.children.len()))?;
        let child = self.td.town(child_id);

        let mut sibling: Option<(f64, usize)> = None;
        for &other in &town.children {
            if other == child_id {
                continue;
            }
            let d = self
                .m
                .dist_set_set(&child.vertices, &self.td.town(other).vertices);
            let better = match sibling {
                None => true,
                Some((bd, bid)) => d < bd || (d == bd && other < bid),
            };
            if better {
                sibling = Some((d, other));
            }
        }
        let (d_sib, sibling) = sibling.ok_or(EmbedError::SingleChild(town_id))?;

        let mut level = 0usize;
        while !tol::in_window(d_sib, self.cfg.scale(level), self.cfg.scale(level + 1)) {
            level += 1;
            assert!(
                level <= self.ladder.top_level + 1,
                "sibling distance {d_sib} beyond every scale window"
            );
        }

        let mut hub: Option<(f64, usize)> = None;
        for &h in &data.hubs.union {
            let d = self.m.dist_to_set(h, &child.vertices);
            let better = match hub {
                None => true,
                Some((bd, bid)) => d < bd || (d == bd && h < bid),
            };
            if better {
                hub = Some((d, h));
            }
        }
        let (_, hub) = hub.expect("X_T is nonempty for non-leaf towns");

        let bar_i = pe_x.tree.level_for_radius(self.cfg.scale(level));
        let offset = ((1.0 / self.cfg.epsilon).log2() + dhat.log2()).ceil().max(0.0) as usize;
        let bar_l = (bar_i + offset).min(pe_x.tree.top_level);
        let bag = pe_x.tree.cluster_of(bar_l, hub);
        Ok(ConnectingBagChoice {
            child: child_id,
            sibling,
            level,
            hub,
            bar_i,
            bar_l,
            bag,
        })
    }
}

/// One-shot root embedding.
pub fn embed_root(
    m: &MetricInstance,
    td: &TownsDecomposition,
    ladder: &CoverLadder,
    cfg: &HdConfig,
    seed: u64,
) -> Result<Embedding, EmbedError> {
    Ok(Embedder::new(m, td, ladder, cfg)?.embed(seed))
}

/// Validation report for an embedding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbedReport {
    pub violations: Vec<String>,
    pub width: usize,
    pub n_bags: usize,
}

impl EmbedReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks decomposition validity, non-contraction and exact edge lengths.
pub fn validate_embedding(e: &Embedding, m: &MetricInstance) -> EmbedReport {
    let mut violations = validate_decomposition(
        &e.decomp,
        &e.vertices,
        e.edges.keys().copied(),
    );
    for (&(u, v), edge) in &e.edges {
        if edge.len != m.dist(u, v) {
            violations.push(format!(
                "edge ({u}, {v}) length {} differs from metric distance {}",
                edge.len,
                m.dist(u, v)
            ));
        }
    }
    let dh = e.distances();
    for (i, &u) in e.vertices.iter().enumerate() {
        for &v in &e.vertices[i + 1..] {
            let hv = dh[&u][&v];
            if !hv.is_finite() {
                violations.push(format!("embedding disconnects {u} and {v}"));
            } else if !tol::ge(hv, m.dist(u, v)) {
                violations.push(format!(
                    "non-contraction violated for ({u}, {v}): {hv} < {}",
                    m.dist(u, v)
                ));
            }
        }
    }
    EmbedReport {
        violations,
        width: e.width,
        n_bags: e.decomp.bags.len(),
    }
}

/// Per-pair and aggregate stretch over a set of seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StretchStats {
    pub n: usize,
    pub seeds: Vec<u64>,
    /// mean stretch per unordered pair (flattened, u < v)
    pub per_pair_mean: Vec<f64>,
    pub global_mean: f64,
    pub max_stretch: f64,
    pub widths: Vec<usize>,
}

/// Embeds once per seed and measures `dist_H / dist_G` over all pairs.
pub fn measure_stretch(
    m: &MetricInstance,
    td: &TownsDecomposition,
    ladder: &CoverLadder,
    cfg: &HdConfig,
    seeds: &[u64],
) -> Result<StretchStats, EmbedError> {
    assert!(seeds.len() >= 2, "stretch statistics need at least two seeds");
    let embedder = Embedder::new(m, td, ladder, cfg)?;
    let n = m.n();
    let n_pairs = n * (n - 1) / 2;
    let mut sums = vec![0.0f64; n_pairs];
    let mut max_stretch = 0.0f64;
    let mut widths = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let emb = embedder.embed(seed);
        widths.push(emb.width);
        let dh = emb.distances();
        let mut idx = 0;
        for u in 0..n {
            for v in (u + 1)..n {
                let s = dh[&u][&v] / m.dist(u, v);
                sums[idx] += s;
                max_stretch = max_stretch.max(s);
                idx += 1;
            }
        }
    }
    let per_pair_mean: Vec<f64> = sums
        .into_iter()
        .map(|s| s / seeds.len() as f64)
        .collect();
    let global_mean = if n_pairs == 0 {
        1.0
    } else {
        per_pair_mean.iter().sum::<f64>() / n_pairs as f64
    };
    Ok(StretchStats {
        n,
        seeds: seeds.to_vec(),
        per_pair_mean,
        global_mean,
        max_stretch,
        widths,
    })
}
