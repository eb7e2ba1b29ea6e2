//! Cores per town, the shifted approximate core hubs, representatives for
//! child towns, and greedy doubling-dimension estimation.
//!
//! The core of a town at level `i` is what remains after removing every
//! subtown above that level; core hubs are cover hubs inside cores. Each
//! core hub of level `i` is either reused from a lower level (when one sits
//! within `eps * r_i`) or enters the set itself, which nests the hub sets
//! enough to keep their doubling dimension small.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::graph::MetricInstance;
use crate::spc::{CoverLadder, HdConfig};
use crate::tol;
use crate::towns::TownsDecomposition;

/// Nested chain of cores for one town, indexed by level `0..=j`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoreChain {
    pub town: usize,
    /// `cores[i]` is the core on level `i`; `cores[j]` is the town itself
    pub cores: Vec<Vec<usize>>,
}

impl CoreChain {
    pub fn level(&self) -> usize {
        self.cores.len() - 1
    }

    pub fn core(&self, i: usize) -> &[usize] {
        &self.cores[i]
    }
}

/// `C_j = T`, and going down each level removes the child towns peeled
/// there: `C_i` is the town minus all proper subtowns on levels above `i`,
/// i.e. the part still in the sprawl relative to the town's own peeling.
///
/// The sprawl here is relative to the town: counting the town's own
/// town-ness on intermediate levels (the global sprawl) would empty the
/// chain and with it the core hubs that the construction is built on.
pub fn compute_cores(td: &TownsDecomposition, town: usize) -> CoreChain {
    let t = td.town(town);
    let j = t.peel_level;
    let mut cores = vec![Vec::new(); j + 1];
    cores[j] = t.vertices.clone();
    for i in (0..j).rev() {
        let removed: BTreeSet<usize> = t
            .children
            .iter()
            .filter(|&&c| td.town(c).peel_level == i)
            .flat_map(|&c| td.town(c).vertices.iter().copied())
            .collect();
        cores[i] = cores[i + 1]
            .iter()
            .copied()
            .filter(|v| !removed.contains(v))
            .collect();
    }
    CoreChain { town, cores }
}

/// Record of one shift decision: core hub `from` on `level` is represented
/// by `to` at distance `dist` (identity entries have `dist = 0`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub level: usize,
    pub from: usize,
    pub to: usize,
    pub dist: f64,
}

/// Approximate core hubs of a town, per level and as a union.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproxCoreHubs {
    pub town: usize,
    /// `X_T^i` for `i` in `1..=j-1`
    pub per_level: BTreeMap<usize, Vec<usize>>,
    /// sorted union of all levels
    pub union: Vec<usize>,
    pub shifts: Vec<ShiftRecord>,
}

impl ApproxCoreHubs {
    pub fn is_empty(&self) -> bool {
        self.union.is_empty()
    }

    pub fn level(&self, i: usize) -> &[usize] {
        self.per_level.get(&i).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Level loop of the shift construction: a core hub joins as itself unless
/// some already-placed lower-level hub lies within `eps * r_i`; ties go to
/// the closest, then smallest level, then smallest id.
pub fn compute_approx_core_hubs(
    m: &MetricInstance,
    town: usize,
    chain: &CoreChain,
    ladder: &CoverLadder,
    cfg: &HdConfig,
) -> ApproxCoreHubs {
    let j = chain.level();
    let core_hubs = |i: usize| -> Vec<usize> {
        let hubs: BTreeSet<usize> = ladder.hubs(i).iter().copied().collect();
        chain
            .core(i)
            .iter()
            .copied()
            .filter(|v| hubs.contains(v))
            .collect()
    };
    let mut per_level: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut shifts = Vec::new();
    if j >= 2 {
        let first = core_hubs(1);
        for &h in &first {
            shifts.push(ShiftRecord {
                level: 1,
                from: h,
                to: h,
                dist: 0.0,
            });
        }
        if !first.is_empty() {
            per_level.insert(1, first);
        }
    }
    for i in 2..j {
        let r = ladder.scale(i);
        let mut xi: BTreeSet<usize> = BTreeSet::new();
        for h in core_hubs(i) {
            let mut best: Option<(f64, usize, usize)> = None;
            for (&l, members) in per_level.range(..i) {
                for &cand in members {
                    let d = m.dist(h, cand);
                    if tol::le(d, cfg.epsilon * r) {
                        let key = (d, l, cand);
                        let smaller = best.map_or(true, |b: (f64, usize, usize)| {
                            key.0
                                .total_cmp(&b.0)
                                .then(key.1.cmp(&b.1))
                                .then(key.2.cmp(&b.2))
                                == std::cmp::Ordering::Less
                        });
                        if smaller {
                            best = Some(key);
                        }
                    }
                }
            }
            match best {
                Some((d, _, cand)) => {
                    xi.insert(cand);
                    shifts.push(ShiftRecord {
                        level: i,
                        from: h,
                        to: cand,
                        dist: d,
                    });
                }
                None => {
                    xi.insert(h);
                    shifts.push(ShiftRecord {
                        level: i,
                        from: h,
                        to: h,
                        dist: 0.0,
                    });
                }
            }
        }
        if !xi.is_empty() {
            per_level.insert(i, xi.into_iter().collect());
        }
    }
    let union: BTreeSet<usize> = per_level.values().flat_map(|v| v.iter().copied()).collect();
    ApproxCoreHubs {
        town,
        per_level,
        union: union.into_iter().collect(),
        shifts,
    }
}

/// Representatives: one hub per child town that intersects the union.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Representatives {
    pub town: usize,
    /// sorted representative hubs, one per intersecting child town
    pub members: Vec<usize>,
    /// representative -> all hubs it stands for (its child town's share)
    pub represents: BTreeMap<usize, Vec<usize>>,
}

/// Picks the smallest-id hub of each child town as its representative.
pub fn select_representatives(
    town: usize,
    x: &ApproxCoreHubs,
    td: &TownsDecomposition,
) -> Representatives {
    let t = td.town(town);
    let mut members = Vec::new();
    let mut represents = BTreeMap::new();
    for &child in &t.children {
        let cset: BTreeSet<usize> = td.town(child).vertices.iter().copied().collect();
        let share: Vec<usize> = x
            .union
            .iter()
            .copied()
            .filter(|v| cset.contains(v))
            .collect();
        if let Some(&rep) = share.first() {
            members.push(rep);
            represents.insert(rep, share);
        }
    }
    members.sort_unstable();
    Representatives {
        town,
        members,
        represents,
    }
}

/// Certificate for the greedy doubling estimate: the worst ball found.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DoublingCertificate {
    pub center: usize,
    pub radius: f64,
    pub cover: Vec<usize>,
}

/// Greedy doubling-dimension estimate of a point set.
///
/// Scans radii derived from pairwise distances; for each ball `B_2r(v)` it
/// greedily covers the contained points with radius-`r` balls (next center:
/// the uncovered point farthest from all chosen ones) and reports
/// `log2(max cover size)`.
pub fn estimate_doubling_dimension(
    points: &[usize],
    m: &MetricInstance,
) -> (f64, DoublingCertificate) {
    assert!(!points.is_empty(), "doubling estimate needs points");
    if points.len() == 1 {
        return (
            0.0,
            DoublingCertificate {
                center: points[0],
                radius: 0.0,
                cover: vec![points[0]],
            },
        );
    }
    let mut radii: Vec<f64> = Vec::new();
    for (i, &u) in points.iter().enumerate() {
        for &v in &points[i + 1..] {
            let d = m.dist(u, v);
            radii.push(d);
            radii.push(d / 2.0);
        }
    }
    radii.sort_by(f64::total_cmp);
    radii.dedup();

    let mut best: Option<DoublingCertificate> = None;
    let mut best_size = 0usize;
    for &v in points {
        for &r in &radii {
            let target: Vec<usize> = points
                .iter()
                .copied()
                .filter(|&u| tol::le(m.dist(v, u), 2.0 * r))
                .collect();
            if target.len() <= best_size {
                continue; // cover size is bounded by the target size
            }
            let cover = greedy_ball_cover(&target, v, r, m);
            if cover.len() > best_size {
                best_size = cover.len();
                best = Some(DoublingCertificate {
                    center: v,
                    radius: r,
                    cover,
                });
            }
        }
    }
    let cert = best.expect("at least one ball is scanned");
    ((best_size as f64).log2(), cert)
}

fn greedy_ball_cover(target: &[usize], start: usize, r: f64, m: &MetricInstance) -> Vec<usize> {
    let mut centers = vec![start];
    let mut covered: Vec<bool> = target
        .iter()
        .map(|&u| tol::le(m.dist(start, u), r))
        .collect();
    loop {
        let mut far: Option<(f64, usize, usize)> = None; // (dist, id, index)
        for (idx, &u) in target.iter().enumerate() {
            if covered[idx] {
                continue;
            }
            let d = centers
                .iter()
                .map(|&c| m.dist(c, u))
                .fold(f64::INFINITY, f64::min);
            let better = match far {
                None => true,
                Some((fd, fid, _)) => d > fd || (d == fd && u < fid),
            };
            if better {
                far = Some((d, u, idx));
            }
        }
        let Some((_, next, _)) = far else { break };
        centers.push(next);
        for (idx, &u) in target.iter().enumerate() {
            if !covered[idx] && tol::le(m.dist(next, u), r) {
                covered[idx] = true;
            }
        }
    }
    centers
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_metric, rescale_min_distance, WeightedGraph};
    use crate::spc::build_cover_ladder;
    use crate::towns::build_towns_decomposition;

    fn three_cluster() -> WeightedGraph {
        // clusters {0,1,2}, {3,4,5}, {6,7,8} with unit diameter,
        // separations 50 and 2500
        let mut edges = vec![
            (0, 1, 1.0),
            (1, 2, 1.0),
            (0, 2, 1.0),
            (3, 4, 1.0),
            (4, 5, 1.0),
            (3, 5, 1.0),
            (6, 7, 1.0),
            (7, 8, 1.0),
            (6, 8, 1.0),
        ];
        edges.push((2, 3, 50.0));
        edges.push((5, 6, 2500.0));
        WeightedGraph::new(9, edges).unwrap()
    }

    fn pipeline(
        g: WeightedGraph,
        c: f64,
        eps: f64,
    ) -> (MetricInstance, HdConfig, CoverLadder, TownsDecomposition) {
        let m = rescale_min_distance(&build_metric(g).unwrap(), c);
        let cfg = HdConfig::new(c, eps, 0).unwrap();
        let ladder = build_cover_ladder(&m, &cfg).unwrap();
        let td = build_towns_decomposition(&m, &ladder);
        (m, cfg, ladder, td)
    }

    #[test]
    fn core_chain_base_and_bottom() {
        let (_, _, ladder, td) = pipeline(three_cluster(), 5.0, 0.5);
        let chain = compute_cores(&td, td.root);
        let j = chain.level();
        assert_eq!(chain.core(j), td.town(td.root).vertices.as_slice());
        assert!(chain.core(0).is_empty(), "no sprawl at level 0");
    }

    #[test]
    fn cores_match_direct_sprawl_intersection() {
        let (_, _, ladder, td) = pipeline(three_cluster(), 5.0, 0.5);
        let _ = ladder;
        let chain = compute_cores(&td, td.root);
        let j = chain.level();
        let root = td.town(td.root);
        // brute-force oracle: the core at level i is the town minus every
        // proper subtown removed on levels >= i
        for i in 0..j {
            let removed: BTreeSet<usize> = root
                .children
                .iter()
                .filter(|&&c| td.town(c).peel_level >= i)
                .flat_map(|&c| td.town(c).vertices.iter().copied())
                .collect();
            let expect: BTreeSet<usize> = root
                .vertices
                .iter()
                .copied()
                .filter(|v| !removed.contains(v))
                .collect();
            let got: BTreeSet<usize> = chain.core(i).iter().copied().collect();
            assert_eq!(got, expect, "core at level {i}");
        }
        // each cluster town is gone from the core at its own peel level
        for &c in &root.children {
            let peel = td.town(c).peel_level;
            let cset = &td.town(c).vertices;
            assert!(chain.core(peel).iter().all(|v| !cset.contains(v)));
        }
        // nestedness
        for i in 0..j {
            let upper: BTreeSet<usize> = chain.core(i + 1).iter().copied().collect();
            assert!(chain.core(i).iter().all(|v| upper.contains(v)));
        }
    }

    #[test]
    fn shift_bound_holds_and_branches_are_taken() {
        let (m, cfg, ladder, td) = pipeline(three_cluster(), 5.0, 0.5);
        let chain = compute_cores(&td, td.root);
        let x = compute_approx_core_hubs(&m, td.root, &chain, &ladder, &cfg);
        assert!(!x.is_empty());
        for s in &x.shifts {
            assert!(
                tol::le(s.dist, cfg.epsilon * ladder.scale(s.level)),
                "shift {s:?} exceeds eps * r_i"
            );
            assert!(tol::approx_eq(s.dist, m.dist(s.from, s.to)));
        }
        // every X member is a core hub of some level at most its own
        for (&i, members) in &x.per_level {
            for &v in members {
                let ok = (1..=i).any(|l| {
                    chain.core(l).contains(&v) && ladder.hubs(l).contains(&v)
                });
                assert!(ok, "X^{i} member {v} is not a lower-level core hub");
            }
        }
    }

    #[test]
    fn reuse_branch_picks_nearby_lower_hub() {
        // path fixture: two hubs close together at consecutive levels
        // 0 -1- 1 -1- 2 ... chain long enough to give multiple levels
        let g = WeightedGraph::new(
            6,
            vec![
                (0, 1, 1.0),
                (1, 2, 1.0),
                (2, 3, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
            ],
        )
        .unwrap();
        let (m, cfg, ladder, td) = {
            let m = rescale_min_distance(&build_metric(g).unwrap(), 5.0);
            let cfg = HdConfig::new(5.0, 1.0, 0).unwrap();
            let ladder = build_cover_ladder(&m, &cfg).unwrap();
            let td = build_towns_decomposition(&m, &ladder);
            (m, cfg, ladder, td)
        };
        let chain = compute_cores(&td, td.root);
        let x = compute_approx_core_hubs(&m, td.root, &chain, &ladder, &cfg);
        let reused = x
            .shifts
            .iter()
            .any(|s| s.from != s.to && s.dist > 0.0);
        let selfed = x.shifts.iter().any(|s| s.from == s.to);
        assert!(selfed, "some hub must enter as itself");
        // with eps = 1 the level scales grow slowly, so reuse should occur
        // whenever consecutive-level hubs are close; tolerate fixtures where
        // the greedy covers pick identical hubs (also a reuse)
        let identical_across_levels = x
            .per_level
            .values()
            .flat_map(|v| v.iter())
            .collect::<BTreeSet<_>>()
            .len()
            < x.shifts.len();
        assert!(
            reused || identical_across_levels,
            "expected at least one reuse: {:?}",
            x.shifts
        );
    }

    #[test]
    fn representatives_partition_union() {
        let (m, cfg, ladder, td) = pipeline(three_cluster(), 5.0, 0.5);
        let chain = compute_cores(&td, td.root);
        let x = compute_approx_core_hubs(&m, td.root, &chain, &ladder, &cfg);
        let reps = select_representatives(td.root, &x, &td);
        let mut all: Vec<usize> = reps
            .represents
            .values()
            .flat_map(|v| v.iter().copied())
            .collect();
        all.sort_unstable();
        assert_eq!(all, x.union, "represented sets partition X_T");
        for (rep, share) in &reps.represents {
            assert!(share.contains(rep));
            assert_eq!(*rep, *share.iter().min().unwrap(), "smallest id represents");
            // the share lies inside exactly one child town
            let child = td
                .town(td.root)
                .children
                .iter()
                .find(|&&cid| td.town(cid).vertices.contains(rep))
                .copied()
                .unwrap();
            let cset: BTreeSet<usize> =
                td.town(child).vertices.iter().copied().collect();
            assert!(share.iter().all(|v| cset.contains(v)));
        }
    }

    #[test]
    fn empty_x_gives_empty_y() {
        let x = ApproxCoreHubs {
            town: 0,
            per_level: BTreeMap::new(),
            union: vec![],
            shifts: vec![],
        };
        let (m, _, ladder, td) = pipeline(three_cluster(), 5.0, 0.5);
        let _ = (m, ladder);
        let reps = select_representatives(td.root, &x, &td);
        assert!(reps.members.is_empty());
    }

    #[test]
    fn doubling_estimate_trivia() {
        let g = WeightedGraph::new(2, vec![(0, 1, 3.0)]).unwrap();
        let m = build_metric(g).unwrap();
        let (d, _) = estimate_doubling_dimension(&[0], &m);
        assert_eq!(d, 0.0);
        let (d2, _) = estimate_doubling_dimension(&[0, 1], &m);
        assert!(d2 <= 1.0 + 1e-12, "two points need at most two balls");
    }

    #[test]
    fn star_doubling_estimate_is_logarithmic() {
        let n = 17;
        let edges = (1..n).map(|i| (0, i, 1.0)).collect();
        let m = build_metric(WeightedGraph::new(n, edges).unwrap()).unwrap();
        let all: Vec<usize> = (0..n).collect();
        let (d, cert) = estimate_doubling_dimension(&all, &m);
        assert!(d >= 4.0, "star on 17 vertices needs 2^4 balls, got {d} ({cert:?})");
    }
}
