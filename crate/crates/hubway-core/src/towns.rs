//! Sprawl/town partitions per level and the laminar towns decomposition.
//!
//! A town for scale `r` is the radius-`r` neighborhood of a vertex farther
//! than `2r` from every hub of `SPC(r)`; everything else at that scale is
//! sprawl. Towns across all levels form a laminar family rooted at `V`,
//! which drives the recursive embedding.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::graph::MetricInstance;
use crate::spc::CoverLadder;
use crate::tol;

/// One node of the laminar towns tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Town {
    pub id: usize,
    /// sorted vertex ids
    pub vertices: Vec<usize>,
    /// every level on which this vertex set qualifies as a town
    pub levels: Vec<usize>,
    /// level at which the town was peeled off its parent (recursion level)
    pub peel_level: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

impl Town {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TownsDecomposition {
    pub towns: Vec<Town>,
    pub root: usize,
    /// sprawl vertex set per ladder level
    pub sprawl_by_level: Vec<Vec<usize>>,
}

impl TownsDecomposition {
    pub fn town(&self, id: usize) -> &Town {
        &self.towns[id]
    }

    pub fn sprawl(&self, level: usize) -> &[usize] {
        &self.sprawl_by_level[level]
    }
}

/// Towns and sprawl of one level: maximal balls around seeds that are
/// farther than `2r` from every hub.
pub fn sprawl_and_towns_at_level(
    m: &MetricInstance,
    ladder: &CoverLadder,
    level: usize,
) -> (Vec<usize>, Vec<Vec<usize>>) {
    let r = ladder.scale(level);
    let hubs = ladder.hubs(level);
    towns_for_scale(m, hubs, r)
}

fn towns_for_scale(m: &MetricInstance, hubs: &[usize], r: f64) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = m.n();
    let mut in_town = vec![false; n];
    let mut towns: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        if in_town[v] {
            continue;
        }
        let far = hubs.is_empty() || tol::gt(m.dist_to_set(v, hubs), 2.0 * r);
        if !far {
            continue;
        }
        let town = m.ball(v, r);
        for &u in &town {
            debug_assert!(!in_town[u], "towns of one scale must be disjoint");
            in_town[u] = true;
        }
        towns.push(town);
    }
    let sprawl = (0..n).filter(|&v| !in_town[v]).collect();
    (sprawl, towns)
}

/// Checks whether `set` qualifies as a town on `level` (some member seeds it).
fn is_town_at_level(m: &MetricInstance, ladder: &CoverLadder, set: &[usize], level: usize) -> bool {
    let r = ladder.scale(level);
    let hubs = ladder.hubs(level);
    set.iter().any(|&v| {
        let far = hubs.is_empty() || tol::gt(m.dist_to_set(v, hubs), 2.0 * r);
        far && m.ball(v, r) == set
    })
}

/// Builds the laminar towns decomposition by the top-down peel procedure:
/// starting from the whole vertex set, repeatedly remove towns of the next
/// lower level until no vertex remains, then recurse on each removed town.
pub fn build_towns_decomposition(m: &MetricInstance, ladder: &CoverLadder) -> TownsDecomposition {
    let n = m.n();
    let top = ladder.top_level;
    let mut level_towns: Vec<Vec<Vec<usize>>> = Vec::with_capacity(top + 1);
    let mut sprawl_by_level = Vec::with_capacity(top + 1);
    for i in 0..=top {
        let (sprawl, towns) = sprawl_and_towns_at_level(m, ladder, i);
        sprawl_by_level.push(sprawl);
        level_towns.push(towns);
    }

    let mut towns: Vec<Town> = Vec::new();
    let all: Vec<usize> = (0..n).collect();
    let root = peel(m, ladder, &level_towns, &all, top, None, &mut towns);
    TownsDecomposition {
        towns,
        root,
        sprawl_by_level,
    }
}

fn peel(
    m: &MetricInstance,
    ladder: &CoverLadder,
    level_towns: &[Vec<Vec<usize>>],
    set: &[usize],
    peel_level: usize,
    parent: Option<usize>,
    out: &mut Vec<Town>,
) -> usize {
    let id = out.len();
    let levels = (0..level_towns.len())
        .filter(|&i| is_town_at_level(m, ladder, set, i))
        .collect();
    out.push(Town {
        id,
        vertices: set.to_vec(),
        levels,
        peel_level,
        parent,
        children: Vec::new(),
    });
    if set.len() == 1 {
        return id;
    }
    let set_lookup: BTreeSet<usize> = set.iter().copied().collect();
    let mut remaining = set_lookup.clone();
    let mut removed: Vec<(Vec<usize>, usize)> = Vec::new();
    for i in (0..peel_level).rev() {
        for town in &level_towns[i] {
            if town.len() == set.len() {
                continue; // the set itself can be a town on lower levels
            }
            if town.iter().all(|v| remaining.contains(v)) {
                for v in town {
                    remaining.remove(v);
                }
                removed.push((town.clone(), i));
            }
        }
    }
    assert!(
        remaining.is_empty(),
        "peeling must consume the whole town (level-0 towns are singletons)"
    );
    let mut child_ids = Vec::with_capacity(removed.len());
    for (child_set, child_level) in removed {
        let child = peel(m, ladder, level_towns, &child_set, child_level, Some(id), out);
        child_ids.push(child);
    }
    out[id].children = child_ids;
    id
}

/// Validation report for a towns decomposition.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TownsReport {
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

impl TownsReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks diameter/separation per claimed level, laminarity, the child-count
/// rule, leaf shape and the partition property.
pub fn validate_towns(
    td: &TownsDecomposition,
    m: &MetricInstance,
    ladder: &CoverLadder,
) -> TownsReport {
    let mut report = TownsReport::default();
    let n = m.n();

    let root = td.town(td.root);
    if root.vertices.len() != n {
        report.violations.push(format!(
            "root covers {} of {} vertices",
            root.vertices.len(),
            n
        ));
    }

    for town in &td.towns {
        for &i in &town.levels {
            let r = ladder.scale(i);
            let diam = m.diam_of(&town.vertices);
            if !tol::le(diam, r) {
                report.violations.push(format!(
                    "town {} diameter {} exceeds r_{} = {}",
                    town.id, diam, i, r
                ));
            }
            let outside: Vec<usize> = (0..n)
                .filter(|v| !town.vertices.contains(v))
                .collect();
            if !outside.is_empty() {
                let sep = m.dist_set_set(&town.vertices, &outside);
                if !tol::gt(sep, r) {
                    report.violations.push(format!(
                        "town {} separation {} not above r_{} = {}",
                        town.id, sep, i, r
                    ));
                }
            }
        }
        if town.levels.is_empty() {
            report
                .violations
                .push(format!("town {} qualifies on no level", town.id));
        } else {
            let lo = *town.levels.first().unwrap();
            let hi = *town.levels.last().unwrap();
            if town.levels.len() != hi - lo + 1 {
                report.notes.push(format!(
                    "town {} qualifies on non-consecutive levels {:?}",
                    town.id, town.levels
                ));
            }
        }
        match town.children.len() {
            0 => {
                if town.vertices.len() != 1 {
                    report.violations.push(format!(
                        "childless town {} has {} vertices (leaves must be singletons)",
                        town.id,
                        town.vertices.len()
                    ));
                }
            }
            1 => {
                report
                    .violations
                    .push(format!("child count: town {} has exactly one child", town.id));
            }
            _ => {
                let union: BTreeSet<usize> = town
                    .children
                    .iter()
                    .flat_map(|&cid| td.town(cid).vertices.iter().copied())
                    .collect();
                let own: BTreeSet<usize> = town.vertices.iter().copied().collect();
                if union != own {
                    report.violations.push(format!(
                        "children of town {} do not partition it",
                        town.id
                    ));
                }
                for &cid in &town.children {
                    if td.town(cid).peel_level >= town.peel_level {
                        report.violations.push(format!(
                            "child {} of town {} peels at level {} >= parent level {}",
                            cid,
                            town.id,
                            td.town(cid).peel_level,
                            town.peel_level
                        ));
                    }
                }
            }
        }
    }

    for a in &td.towns {
        for b in &td.towns {
            if a.id >= b.id {
                continue;
            }
            let sa: BTreeSet<usize> = a.vertices.iter().copied().collect();
            let sb: BTreeSet<usize> = b.vertices.iter().copied().collect();
            let inter = sa.intersection(&sb).count();
            if inter > 0 && !sa.is_subset(&sb) && !sb.is_subset(&sa) {
                report.violations.push(format!(
                    "laminarity breach between towns {} and {}",
                    a.id, b.id
                ));
            }
        }
    }

    report
}

/// Grouping oracle from the scale structure: vertices far from all hubs of
/// one level are either close (within `r`) or far apart (beyond `cr/2`).
pub fn check_cluster_dichotomy(
    m: &MetricInstance,
    ladder: &CoverLadder,
    level: usize,
) -> Vec<(usize, usize)> {
    let r = ladder.scale(level);
    let c = ladder.config.c;
    let hubs = ladder.hubs(level);
    let far: Vec<usize> = (0..m.n())
        .filter(|&v| hubs.is_empty() || tol::gt(m.dist_to_set(v, hubs), c * r / 4.0))
        .collect();
    let mut offenders = Vec::new();
    for (ai, &u) in far.iter().enumerate() {
        for &v in &far[ai + 1..] {
            let d = m.dist(u, v);
            if !(tol::le(d, r) || tol::gt(d, c * r / 2.0)) {
                offenders.push((u, v));
            }
        }
    }
    offenders
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_metric, rescale_min_distance, WeightedGraph};
    use crate::spc::{build_cover_ladder, HdConfig};

    fn prepared(g: WeightedGraph, c: f64) -> (MetricInstance, CoverLadder) {
        let m = rescale_min_distance(&build_metric(g).unwrap(), c);
        let cfg = HdConfig::new(c, 0.5, 0).unwrap();
        let ladder = build_cover_ladder(&m, &cfg).unwrap();
        (m, ladder)
    }

    fn two_triangles() -> WeightedGraph {
        let edges = vec![
            (0, 1, 1.0),
            (1, 2, 1.0),
            (0, 2, 1.0),
            (3, 4, 1.0),
            (4, 5, 1.0),
            (3, 5, 1.0),
            (2, 3, 100.0),
        ];
        WeightedGraph::new(6, edges).unwrap()
    }

    /// Brute-force evaluation of the town definition for one scale.
    fn towns_oracle(m: &MetricInstance, hubs: &[usize], r: f64) -> Vec<Vec<usize>> {
        let mut sets: Vec<Vec<usize>> = Vec::new();
        for v in 0..m.n() {
            let far = hubs.is_empty() || tol::gt(m.dist_to_set(v, hubs), 2.0 * r);
            if far {
                let t = m.ball(v, r);
                if !sets.contains(&t) {
                    sets.push(t);
                }
            }
        }
        sets
    }

    #[test]
    fn level_zero_is_all_singletons() {
        let (m, ladder) = prepared(two_triangles(), 5.0);
        let (sprawl, towns) = sprawl_and_towns_at_level(&m, &ladder, 0);
        assert!(sprawl.is_empty());
        assert_eq!(towns.len(), m.n());
        assert!(towns.iter().all(|t| t.len() == 1));
    }

    #[test]
    fn top_level_is_single_town() {
        let (m, ladder) = prepared(two_triangles(), 5.0);
        let (sprawl, towns) = sprawl_and_towns_at_level(&m, &ladder, ladder.top_level);
        assert!(sprawl.is_empty());
        assert_eq!(towns, vec![(0..m.n()).collect::<Vec<_>>()]);
    }

    #[test]
    fn triangles_become_towns_at_mid_levels() {
        let (m, ladder) = prepared(two_triangles(), 5.0);
        let mut seen_split = false;
        for i in 0..=ladder.top_level {
            let (_, towns) = sprawl_and_towns_at_level(&m, &ladder, i);
            let oracle = towns_oracle(&m, ladder.hubs(i), ladder.scale(i));
            let mut got = towns.clone();
            got.sort();
            let mut want = oracle.clone();
            want.sort();
            assert_eq!(got, want, "level {i}");
            if towns.contains(&vec![0, 1, 2]) && towns.contains(&vec![3, 4, 5]) {
                seen_split = true;
            }
        }
        assert!(seen_split, "each triangle must be a town on some level");
    }

    #[test]
    fn decomposition_of_single_vertex() {
        let g = WeightedGraph::new(1, vec![]).unwrap();
        let m = build_metric(g).unwrap();
        let cfg = HdConfig::new(5.0, 0.5, 0).unwrap();
        let ladder = build_cover_ladder(&m, &cfg).unwrap();
        let td = build_towns_decomposition(&m, &ladder);
        assert_eq!(td.towns.len(), 1);
        assert!(td.town(td.root).is_leaf());
    }

    #[test]
    fn decomposition_of_single_edge() {
        let g = WeightedGraph::new(2, vec![(0, 1, 1.0)]).unwrap();
        let (m, ladder) = prepared(g, 5.0);
        let td = build_towns_decomposition(&m, &ladder);
        let root = td.town(td.root);
        assert_eq!(root.vertices, vec![0, 1]);
        assert_eq!(root.children.len(), 2);
        assert!(validate_towns(&td, &m, &ladder).is_clean());
    }

    #[test]
    fn two_triangle_decomposition_is_valid() {
        let (m, ladder) = prepared(two_triangles(), 5.0);
        let td = build_towns_decomposition(&m, &ladder);
        let report = validate_towns(&td, &m, &ladder);
        assert!(report.is_clean(), "{:?}", report.violations);
        let root = td.town(td.root);
        assert_eq!(root.children.len(), 2, "two triangle towns expected");
    }

    #[test]
    fn cluster_dichotomy_holds() {
        let (m, ladder) = prepared(two_triangles(), 5.0);
        for i in 0..=ladder.top_level {
            assert!(check_cluster_dichotomy(&m, &ladder, i).is_empty(), "level {i}");
        }
    }

    #[test]
    fn corrupted_decomposition_is_reported() {
        let (m, ladder) = prepared(two_triangles(), 5.0);
        let mut td = build_towns_decomposition(&m, &ladder);
        // move a vertex across towns: breaks laminarity
        let victim = td
            .towns
            .iter()
            .position(|t| t.vertices == vec![0, 1, 2])
            .unwrap();
        td.towns[victim].vertices = vec![0, 1, 3];
        let report = validate_towns(&td, &m, &ladder);
        assert!(report.violations.iter().any(|v| v.contains("laminarity")), "{report:?}");
    }

    #[test]
    fn single_child_town_is_reported() {
        let (m, ladder) = prepared(two_triangles(), 5.0);
        let mut td = build_towns_decomposition(&m, &ladder);
        let fake = Town {
            id: td.towns.len(),
            vertices: vec![0, 1, 2],
            levels: vec![ladder.top_level],
            peel_level: ladder.top_level,
            parent: Some(td.root),
            children: vec![1],
        };
        td.towns.push(fake);
        let report = validate_towns(&td, &m, &ladder);
        assert!(report.violations.iter().any(|v| v.contains("child count")), "{report:?}");
    }
}
