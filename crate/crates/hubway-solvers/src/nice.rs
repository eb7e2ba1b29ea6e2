//! Nice tree decompositions with explicit edge-introduce nodes.
//!
//! Between a bag and each child all differing vertices are forgotten and
//! introduced one at a time; multiple children are folded with joins; every
//! graph edge is introduced exactly once, at the smallest-id bag containing
//! both endpoints. The root chain forgets everything, so the final bag is
//! empty.

use std::collections::BTreeMap;

use hubway_core::treedecomp::BagTree;

#[derive(Debug, Clone)]
pub enum NiceNode {
    Leaf,
    Introduce { v: usize, child: usize },
    IntroduceEdge { u: usize, v: usize, len: f64, child: usize },
    Forget { v: usize, child: usize },
    Join { left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub struct NiceDecomposition {
    pub nodes: Vec<NiceNode>,
    /// sorted bag per node
    pub bags: Vec<Vec<usize>>,
    pub root: usize,
}

impl NiceDecomposition {
    fn push(&mut self, node: NiceNode, bag: Vec<usize>) -> usize {
        self.nodes.push(node);
        self.bags.push(bag);
        self.nodes.len() - 1
    }
}

/// Builds the nice decomposition for `tree` over the given edge set.
///
/// Every edge must be contained in some bag (checked by assertion).
pub fn make_nice(tree: &BagTree, edges: &BTreeMap<(usize, usize), f64>) -> NiceDecomposition {
    // assign each edge to the smallest-id bag containing both endpoints
    let mut edge_site: BTreeMap<usize, Vec<(usize, usize, f64)>> = BTreeMap::new();
    for (&(u, v), &len) in edges {
        let site = tree
            .bags
            .iter()
            .position(|b| b.members.contains(&u) && b.members.contains(&v))
            .unwrap_or_else(|| panic!("edge ({u}, {v}) not inside any bag"));
        edge_site.entry(site).or_default().push((u, v, len));
    }
    let mut nice = NiceDecomposition {
        nodes: Vec::new(),
        bags: Vec::new(),
        root: 0,
    };
    let top = assemble(tree, tree.root, &edge_site, &mut nice);
    // forget the root bag down to empty
    let mut cur = top;
    let mut bag = nice.bags[cur].clone();
    while let Some(&v) = bag.first() {
        bag.remove(0);
        cur = nice.push(NiceNode::Forget { v, child: cur }, bag.clone());
    }
    nice.root = cur;
    nice
}

fn assemble(
    tree: &BagTree,
    bag_id: usize,
    edge_site: &BTreeMap<usize, Vec<(usize, usize, f64)>>,
    nice: &mut NiceDecomposition,
) -> usize {
    let target: Vec<usize> = tree.bags[bag_id].members.iter().copied().collect();
    let children = &tree.bags[bag_id].children;

    let mut shaped: Vec<usize> = Vec::new();
    for &child in children {
        let mut cur = assemble(tree, child, edge_site, nice);
        let mut bag = nice.bags[cur].clone();
        // forget what the parent bag lacks
        for v in bag.clone() {
            if !target.contains(&v) {
                bag.retain(|&x| x != v);
                cur = nice.push(NiceNode::Forget { v, child: cur }, bag.clone());
            }
        }
        // introduce what the child lacks
        for &v in &target {
            if !bag.contains(&v) {
                bag.push(v);
                bag.sort_unstable();
                cur = nice.push(NiceNode::Introduce { v, child: cur }, bag.clone());
            }
        }
        shaped.push(cur);
    }

    let mut cur = match shaped.split_first() {
        None => {
            let mut cur = nice.push(NiceNode::Leaf, Vec::new());
            let mut bag: Vec<usize> = Vec::new();
            for &v in &target {
                bag.push(v);
                bag.sort_unstable();
                cur = nice.push(NiceNode::Introduce { v, child: cur }, bag.clone());
            }
            cur
        }
        Some((&first, rest)) => {
            let mut cur = first;
            for &other in rest {
                cur = nice.push(
                    NiceNode::Join {
                        left: cur,
                        right: other,
                    },
                    target.clone(),
                );
            }
            cur
        }
    };
    if let Some(list) = edge_site.get(&bag_id) {
        for &(u, v, len) in list {
            cur = nice.push(
                NiceNode::IntroduceEdge { u, v, len, child: cur },
                target.clone(),
            );
        }
    }
    cur
}
