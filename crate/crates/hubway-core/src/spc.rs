//! Shortest-path covers per scale, sparsity auditing and exact highway
//! dimension under the three competing definitions.
//!
//! A cover for scale `r` hits every canonical shortest path of length in
//! `(r, cr/2]`. Covers are built greedily (max coverage, ties by smallest
//! vertex id) and then pruned in reverse insertion order, which leaves an
//! inclusion-wise minimal set.

use serde::{Deserialize, Serialize};

use crate::graph::MetricInstance;
use crate::tol;

#[derive(Debug, thiserror::Error)]
pub enum SpcError {
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("exact hd limited to small n (n = {0})")]
    TooLarge(usize),
}

/// Scale/stretch parameters shared across the pipeline.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HdConfig {
    pub c: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub seed: u64,
}

impl HdConfig {
    pub fn new(c: f64, epsilon: f64, seed: u64) -> Result<Self, SpcError> {
        if !(c.is_finite() && c >= 4.0) {
            return Err(SpcError::BadConfig(format!("c must be >= 4, got {c}")));
        }
        if !(epsilon.is_finite() && epsilon > 0.0 && epsilon <= 1.0) {
            return Err(SpcError::BadConfig(format!(
                "epsilon must be in (0, 1], got {epsilon}"
            )));
        }
        Ok(HdConfig {
            c,
            lambda: c - 4.0,
            epsilon,
            epsilon_prime: epsilon * epsilon,
            seed,
        })
    }

    /// Scale of level `i`: `(c/4)^i`.
    pub fn scale(&self, i: usize) -> f64 {
        (self.c / 4.0).powi(i as i32)
    }
}

/// One level of the cover ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverLevel {
    pub index: usize,
    pub scale: f64,
    pub hubs: Vec<usize>,
    pub sparsity: usize,
}

/// Shortest-path covers over all scales `r_i = (c/4)^i`.
#[derive(Debug, Clone)]
pub struct CoverLadder {
    pub config: HdConfig,
    pub levels: Vec<CoverLevel>,
    pub top_level: usize,
    /// max over levels of the measured local sparsity
    pub sparsity: usize,
}

impl CoverLadder {
    pub fn hubs(&self, level: usize) -> &[usize] {
        &self.levels[level].hubs
    }

    pub fn scale(&self, level: usize) -> f64 {
        self.levels[level].scale
    }
}

/// Canonical paths (one per unordered pair) with length in `(lo, hi]`.
pub fn paths_in_window(m: &MetricInstance, lo: f64, hi: f64) -> Vec<Vec<usize>> {
    let n = m.n();
    let mut paths = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if tol::in_window(m.dist(u, v), lo, hi) {
                paths.push(m.canonical_shortest_path(u, v));
            }
        }
    }
    paths
}

/// Greedy maximum-coverage hitting set followed by a reverse pruning pass.
fn greedy_minimal_hitting_set(n: usize, paths: &[Vec<usize>]) -> Vec<usize> {
    if paths.is_empty() {
        return Vec::new();
    }
    let mut covered = vec![false; paths.len()];
    let mut remaining = paths.len();
    let mut chosen: Vec<usize> = Vec::new();
    while remaining > 0 {
        let mut count = vec![0usize; n];
        for (pi, path) in paths.iter().enumerate() {
            if !covered[pi] {
                for &v in path {
                    count[v] += 1;
                }
            }
        }
        let best = (0..n).max_by_key(|&v| (count[v], std::cmp::Reverse(v))).unwrap();
        assert!(count[best] > 0, "uncovered path without vertices");
        chosen.push(best);
        for (pi, path) in paths.iter().enumerate() {
            if !covered[pi] && path.contains(&best) {
                covered[pi] = true;
                remaining -= 1;
            }
        }
    }
    // reverse pruning: drop late greedy picks that other hubs already cover
    let mut keep = vec![true; chosen.len()];
    for ci in (0..chosen.len()).rev() {
        keep[ci] = false;
        let active: Vec<usize> = chosen
            .iter()
            .enumerate()
            .filter(|&(i, _)| keep[i])
            .map(|(_, &h)| h)
            .collect();
        let all_covered = paths
            .iter()
            .all(|p| p.iter().any(|v| active.contains(v)));
        if !all_covered {
            keep[ci] = true;
        }
    }
    let mut hubs: Vec<usize> = chosen
        .into_iter()
        .zip(keep)
        .filter(|&(_, k)| k)
        .map(|(h, _)| h)
        .collect();
    hubs.sort_unstable();
    hubs.dedup();
    hubs
}

/// Minimal cover hitting all canonical paths of length in `(r, cr/2]`.
pub fn compute_spc_level(m: &MetricInstance, r: f64, cfg: &HdConfig) -> Vec<usize> {
    let paths = paths_in_window(m, r, cfg.c * r / 2.0);
    greedy_minimal_hitting_set(m.n(), &paths)
}

/// Max number of hubs in any ball of radius `cr/2`.
pub fn local_sparsity(m: &MetricInstance, hubs: &[usize], r: f64, cfg: &HdConfig) -> usize {
    if hubs.is_empty() {
        return 0;
    }
    let radius = cfg.c * r / 2.0;
    (0..m.n())
        .map(|v| hubs.iter().filter(|&&h| tol::le(m.dist(v, h), radius)).count())
        .max()
        .unwrap_or(0)
}

/// Number of hubs within distance `cr/2` of the ball `B_{cr/2}(v)`.
pub fn vicinity_hub_count(
    m: &MetricInstance,
    hubs: &[usize],
    v: usize,
    r: f64,
    cfg: &HdConfig,
) -> usize {
    let radius = cfg.c * r / 2.0;
    let ball = m.ball(v, radius);
    hubs.iter()
        .filter(|&&h| {
            let d = ball
                .iter()
                .map(|&u| m.dist(h, u))
                .fold(f64::INFINITY, f64::min);
            tol::le(d, radius)
        })
        .count()
}

/// Number of ladder levels above level 0: `m = ceil(log_{c/4} diam)`.
pub fn top_level(m: &MetricInstance, cfg: &HdConfig) -> usize {
    if m.n() <= 1 {
        return 0;
    }
    let base = cfg.c / 4.0;
    let raw = m.diam.ln() / base.ln();
    let mut level = (raw - 1e-12).ceil().max(1.0) as usize;
    // the top scale must reach the diameter
    while tol::gt(m.diam, cfg.scale(level)) {
        level += 1;
    }
    level
}

/// Builds covers for every level `0..=m`.
///
/// Requires a metric rescaled via `rescale_min_distance(cfg.c)` and a
/// strictly positive violation so the scales actually grow.
pub fn build_cover_ladder(m: &MetricInstance, cfg: &HdConfig) -> Result<CoverLadder, SpcError> {
    if cfg.lambda <= 0.0 {
        return Err(SpcError::BadConfig(
            "cover ladder needs violation lambda = c - 4 > 0".into(),
        ));
    }
    let top = top_level(m, cfg);
    let mut levels = Vec::with_capacity(top + 1);
    let mut sparsity = 0usize;
    for i in 0..=top {
        let r = cfg.scale(i);
        let hubs = compute_spc_level(m, r, cfg);
        let s = local_sparsity(m, &hubs, r, cfg);
        sparsity = sparsity.max(s);
        levels.push(CoverLevel {
            index: i,
            scale: r,
            hubs,
            sparsity: s,
        });
    }
    debug_assert!(levels[0].hubs.is_empty(), "level 0 must have no coverable paths");
    debug_assert!(levels[top].hubs.is_empty(), "top level must have no coverable paths");
    Ok(CoverLadder {
        config: *cfg,
        levels,
        top_level: top,
        sparsity,
    })
}

/// The three highway-dimension definitions compared in the paper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HdVariant {
    /// hubs inside `B_cr(v)` hitting all shortest paths in the ball longer than `r`
    Def1,
    /// hitting sets for `r`-significant paths `(r,2r)`-close to `v`
    Def18,
    /// hubs hitting all paths of length in `(r,2r]` intersecting `B_2r(v)`
    Def19,
}

const EXACT_HD_MAX_N: usize = 20;

/// Exact minimum hitting set over the family, by branch and bound.
fn min_hitting_set(paths: &[Vec<usize>]) -> usize {
    // drop paths that are supersets of another path
    let mut family: Vec<Vec<usize>> = Vec::new();
    let mut sorted: Vec<Vec<usize>> = paths
        .iter()
        .map(|p| {
            let mut q = p.clone();
            q.sort_unstable();
            q.dedup();
            q
        })
        .collect();
    sorted.sort_by_key(|p| p.len());
    'outer: for p in sorted {
        for q in &family {
            if q.iter().all(|v| p.binary_search(v).is_ok()) {
                continue 'outer;
            }
        }
        family.push(p);
    }
    fn search(family: &[Vec<usize>], alive: &[bool], best: &mut usize, depth: usize) {
        if depth >= *best {
            return;
        }
        let target = alive.iter().position(|&a| a);
        let Some(target) = target else {
            *best = depth;
            return;
        };
        for &v in &family[target] {
            let mut next = alive.to_vec();
            for (i, p) in family.iter().enumerate() {
                if next[i] && p.binary_search(&v).is_ok() {
                    next[i] = false;
                }
            }
            search(family, &next, best, depth + 1);
        }
    }
    if family.is_empty() {
        return 0;
    }
    let mut best = family.len() + 1;
    let alive = vec![true; family.len()];
    search(&family, &alive, &mut best, 0);
    best
}

fn def1_family(m: &MetricInstance, canon: &[Vec<usize>], v: usize, r: f64, c: f64) -> Vec<Vec<usize>> {
    let ball = m.ball(v, c * r);
    canon
        .iter()
        .filter(|p| {
            let len = m.path_length(p);
            tol::gt(len, r) && p.iter().all(|x| ball.binary_search(x).is_ok())
        })
        .cloned()
        .collect()
}

fn def19_family(m: &MetricInstance, canon: &[Vec<usize>], v: usize, r: f64) -> Vec<Vec<usize>> {
    let ball = m.ball(v, 2.0 * r);
    canon
        .iter()
        .filter(|p| {
            let len = m.path_length(p);
            tol::in_window(len, r, 2.0 * r) && p.iter().any(|x| ball.binary_search(x).is_ok())
        })
        .cloned()
        .collect()
}

fn def18_family(m: &MetricInstance, canon: &[Vec<usize>], v: usize, r: f64) -> Vec<Vec<usize>> {
    // every trimming (at most one vertex off each end) of a long witness
    // path that passes within 2r of v is significant and close
    let mut family: Vec<Vec<usize>> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for witness in canon {
        let len = m.path_length(witness);
        if !tol::gt(len, r) {
            continue;
        }
        let close = witness.iter().any(|&x| tol::le(m.dist(x, v), 2.0 * r));
        if !close {
            continue;
        }
        let k = witness.len();
        for lead in 0..=1usize {
            for trail in 0..=1usize {
                if lead + trail >= k {
                    continue;
                }
                let sub = witness[lead..k - trail].to_vec();
                if seen.insert(sub.clone()) {
                    family.push(sub);
                }
            }
        }
    }
    family
}

/// Scan grid: distinct path lengths scaled by the window thresholds, both
/// nudged just below each breakpoint and at the breakpoint itself.
fn scale_grid(m: &MetricInstance, effective_c: f64) -> Vec<f64> {
    let n = m.n();
    let mut lengths: Vec<f64> = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            lengths.push(m.dist(u, v));
        }
    }
    lengths.sort_by(f64::total_cmp);
    lengths.dedup();
    let mut grid = Vec::new();
    for &len in &lengths {
        for divisor in [1.0, effective_c / 2.0, effective_c] {
            let base = len / divisor;
            grid.push(base * (1.0 - 1e-9));
            grid.push(base);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Exact highway dimension on the enumerated critical-scale grid.
///
/// Desk-scale only: exhaustive minimum hitting sets per (scale, center).
pub fn highway_dimension(
    m: &MetricInstance,
    cfg: &HdConfig,
    variant: HdVariant,
) -> Result<usize, SpcError> {
    let n = m.n();
    if n > EXACT_HD_MAX_N {
        return Err(SpcError::TooLarge(n));
    }
    let mut canon = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            canon.push(m.canonical_shortest_path(u, v));
        }
    }
    let effective_c = match variant {
        HdVariant::Def1 => cfg.c,
        HdVariant::Def18 | HdVariant::Def19 => 4.0,
    };
    let grid = scale_grid(m, effective_c);
    let mut k = 0usize;
    for &r in &grid {
        if r <= 0.0 {
            continue;
        }
        for v in 0..n {
            let family = match variant {
                HdVariant::Def1 => def1_family(m, &canon, v, r, cfg.c),
                HdVariant::Def18 => def18_family(m, &canon, v, r),
                HdVariant::Def19 => def19_family(m, &canon, v, r),
            };
            if family.is_empty() {
                continue;
            }
            k = k.max(min_hitting_set(&family));
        }
    }
    Ok(k)
}

/// True when `hubs` hits every canonical path with length in `(r, cr/2]`.
pub fn covers_window(m: &MetricInstance, hubs: &[usize], r: f64, cfg: &HdConfig) -> bool {
    paths_in_window(m, r, cfg.c * r / 2.0)
        .iter()
        .all(|p| p.iter().any(|x| hubs.contains(x)))
}

/// True when every hub is necessary for the window coverage.
pub fn is_minimal_cover(m: &MetricInstance, hubs: &[usize], r: f64, cfg: &HdConfig) -> bool {
    let paths = paths_in_window(m, r, cfg.c * r / 2.0);
    hubs.iter().all(|&h| {
        let rest: Vec<usize> = hubs.iter().copied().filter(|&x| x != h).collect();
        paths.iter().any(|p| {
            p.iter().any(|&x| x == h) && !p.iter().any(|x| rest.contains(x))
        })
    })
}
