//! Rooted tree decompositions (bag trees) and their validity checks.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BagNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub members: BTreeSet<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BagTree {
    pub bags: Vec<BagNode>,
    pub root: usize,
}

impl BagTree {
    pub fn new_single(members: BTreeSet<usize>) -> Self {
        BagTree {
            bags: vec![BagNode {
                id: 0,
                parent: None,
                children: Vec::new(),
                members,
            }],
            root: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(1) - 1
    }

    pub fn bag(&self, id: usize) -> &BagNode {
        &self.bags[id]
    }

    /// Appends another bag tree, re-indexing its ids; returns the id map.
    pub fn absorb(&mut self, other: &BagTree, attach_root_to: usize) -> Vec<usize> {
        let offset = self.bags.len();
        let mut map = Vec::with_capacity(other.bags.len());
        for bag in &other.bags {
            map.push(bag.id + offset);
        }
        for bag in &other.bags {
            self.bags.push(BagNode {
                id: bag.id + offset,
                parent: bag.parent.map(|p| p + offset),
                children: bag.children.iter().map(|&c| c + offset).collect(),
                members: bag.members.clone(),
            });
        }
        let new_root = other.root + offset;
        self.bags[new_root].parent = Some(attach_root_to);
        self.bags[attach_root_to].children.push(new_root);
        map
    }

    /// Ids of `bag` and all its descendants.
    pub fn subtree(&self, bag: usize) -> Vec<usize> {
        let mut out = vec![bag];
        let mut stack = vec![bag];
        while let Some(b) = stack.pop() {
            for &c in &self.bags[b].children {
                out.push(c);
                stack.push(c);
            }
        }
        out
    }
}

impl BagNode {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Checks the three tree-decomposition properties of a bag tree against a
/// vertex set and an edge set; returns human-readable violations.
pub fn validate_decomposition(
    tree: &BagTree,
    vertices: &[usize],
    edges: impl Iterator<Item = (usize, usize)>,
) -> Vec<String> {
    let mut violations = Vec::new();

    let mut covered: BTreeSet<usize> = BTreeSet::new();
    for bag in &tree.bags {
        covered.extend(bag.members.iter().copied());
    }
    for &v in vertices {
        if !covered.contains(&v) {
            violations.push(format!("vertex {v} in no bag"));
        }
    }

    for (u, v) in edges {
        let ok = tree
            .bags
            .iter()
            .any(|b| b.members.contains(&u) && b.members.contains(&v));
        if !ok {
            violations.push(format!("edge ({u}, {v}) in no bag"));
        }
    }

    // per-vertex connectivity: bags containing v form a connected subtree
    let mut holders: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for bag in &tree.bags {
        for &v in &bag.members {
            holders.entry(v).or_default().push(bag.id);
        }
    }
    for (&v, bags) in &holders {
        if bags.len() <= 1 {
            continue;
        }
        let in_set: BTreeSet<usize> = bags.iter().copied().collect();
        let mut seen = BTreeSet::new();
        let mut stack = vec![bags[0]];
        seen.insert(bags[0]);
        while let Some(b) = stack.pop() {
            let node = &tree.bags[b];
            let mut neighbors: Vec<usize> = node.children.clone();
            if let Some(p) = node.parent {
                neighbors.push(p);
            }
            for nb in neighbors {
                if in_set.contains(&nb) && seen.insert(nb) {
                    stack.push(nb);
                }
            }
        }
        if seen.len() != in_set.len() {
            violations.push(format!(
                "bags holding vertex {v} form {} components",
                1 + in_set.len() - seen.len()
            ));
        }
    }

    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn single_bag_is_valid() {
        let t = BagTree::new_single(set(&[0, 1]));
        let violations = validate_decomposition(&t, &[0, 1], vec![(0, 1)].into_iter());
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn missing_edge_and_vertex_are_reported() {
        let t = BagTree::new_single(set(&[0]));
        let violations = validate_decomposition(&t, &[0, 1], vec![(0, 1)].into_iter());
        assert_eq!(violations.len(), 2);
    }

    #[test]
    fn disconnected_holder_is_reported() {
        let mut t = BagTree::new_single(set(&[0]));
        let other = BagTree::new_single(set(&[1]));
        t.absorb(&other, 0);
        let third = BagTree::new_single(set(&[0]));
        t.absorb(&third, 1);
        // vertex 0 sits in the root and in a grandchild, with bag {1} between
        let violations = validate_decomposition(&t, &[0, 1], std::iter::empty());
        assert!(violations.iter().any(|v| v.contains("components")), "{violations:?}");
    }
}
