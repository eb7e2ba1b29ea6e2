//! Min-fill elimination tree decompositions for arbitrary graphs; used to
//! run the treewidth DPs on inputs that do not come with a decomposition.

use std::collections::BTreeSet;

use hubway_core::treedecomp::{BagNode, BagTree};

/// Tree decomposition from min-fill elimination (ties: min degree, min id).
pub fn min_fill_decomposition(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> BagTree {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (u, v) in edges {
        if u != v {
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    let mut alive: BTreeSet<usize> = (0..n).collect();
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut position = vec![usize::MAX; n];
    let mut bags: Vec<BTreeSet<usize>> = Vec::with_capacity(n);
    while let Some(&pick) = {
        let mut best: Option<(usize, usize, usize)> = None; // (fill, degree, id)
        for &v in &alive {
            let neigh: Vec<usize> = adj[v].iter().copied().collect();
            let mut fill = 0usize;
            for (i, &a) in neigh.iter().enumerate() {
                for &b in &neigh[i + 1..] {
                    if !adj[a].contains(&b) {
                        fill += 1;
                    }
                }
            }
            let key = (fill, neigh.len(), v);
            if best.map_or(true, |b| key < b) {
                best = Some(key);
            }
        }
        best.map(|(_, _, v)| v).as_ref()
    } {
        let neigh: Vec<usize> = adj[pick].iter().copied().collect();
        let mut bag: BTreeSet<usize> = neigh.iter().copied().collect();
        bag.insert(pick);
        bags.push(bag);
        position[pick] = order.len();
        order.push(pick);
        for (i, &a) in neigh.iter().enumerate() {
            for &b in &neigh[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        for &u in &neigh {
            adj[u].remove(&pick);
        }
        adj[pick].clear();
        alive.remove(&pick);
    }
    // parent of bag(v): bag of the member eliminated next after v
    let k = order.len();
    let mut nodes: Vec<BagNode> = (0..k)
        .map(|i| BagNode {
            id: i,
            parent: None,
            children: Vec::new(),
            members: bags[i].clone(),
        })
        .collect();
    let root = k - 1;
    for i in 0..k {
        let next = bags[i]
            .iter()
            .filter(|&&u| position[u] > i)
            .map(|&u| position[u])
            .min();
        let parent = match next {
            Some(p) => p,
            None => {
                if i == root {
                    continue;
                }
                root
            }
        };
        nodes[i].parent = Some(parent);
        let child_id = nodes[i].id;
        nodes[parent].children.push(child_id);
    }
    BagTree { bags: nodes, root }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hubway_core::treedecomp::validate_decomposition;

    #[test]
    fn path_graph_has_width_one() {
        let edges = vec![(0, 1), (1, 2), (2, 3)];
        let td = min_fill_decomposition(4, edges.iter().copied());
        assert_eq!(td.width(), 1);
        let violations = validate_decomposition(&td, &[0, 1, 2, 3], edges.into_iter());
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn cycle_has_width_two() {
        let edges = vec![(0, 1), (1, 2), (2, 3), (3, 0)];
        let td = min_fill_decomposition(4, edges.iter().copied());
        assert_eq!(td.width(), 2);
        let violations = validate_decomposition(&td, &[0, 1, 2, 3], edges.into_iter());
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn random_graphs_yield_valid_decompositions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..40 {
            let n = rng.gen_range(2..12);
            let mut edges: Vec<(usize, usize)> =
                (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
            for _ in 0..n / 2 {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if a != b {
                    edges.push((a.min(b), a.max(b)));
                }
            }
            edges.sort_unstable();
            edges.dedup();
            let td = min_fill_decomposition(n, edges.iter().copied());
            let vertices: Vec<usize> = (0..n).collect();
            let violations = validate_decomposition(&td, &vertices, edges.into_iter());
            assert!(violations.is_empty(), "{violations:?}");
        }
    }
}
